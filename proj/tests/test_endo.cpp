#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "inertia/endo.hpp"

using namespace inertia;

namespace {

GroupDescriptor single(const Atom& a) {
    return GroupDescriptor::from_slots({{a, Multiplicity::finite(1)}});
}

Element elem1(CoordKey k, Rat v) {
    Element e;
    e.coords[k] = std::move(v);
    return e;
}

// Desk ambient for randomized checks: Z(4) + Z(2)^2 + Z(3^inf) + Q[2].
GroupDescriptor desk() {
    return GroupDescriptor::from_slots({
        {Atom::cyclic(2, 2), Multiplicity::finite(1)},
        {Atom::cyclic(2, 1), Multiplicity::finite(2)},
        {Atom::prufer(3), Multiplicity::finite(1)},
        {Atom::localized(PrimeSet({2})), Multiplicity::finite(1)},
    });
}

Endomorphism random_endo(const GroupDescriptor& g, std::mt19937& rng) {
    auto pick = [&](int n) { return (int)(rng() % n); };
    Endomorphism phi;
    phi.ambient = g;
    // One block per slot, scalar valid on that slot.
    static const Rat cy_pool[] = {Rat(0), Rat(1), Rat(2), Rat(3), Rat(1, 3), Rat(5, 3)};
    static const Rat pr_pool[] = {Rat(0), Rat(1), Rat(1, 2), Rat(2), Rat(4, 5)};
    static const Rat lo_pool[] = {Rat(0), Rat(1), Rat(3), Rat(1, 2), Rat(3, 4)};
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        const Atom& a = g.slots[s].atom;
        Rat v = a.kind == AtomKind::Cyclic   ? cy_pool[pick(6)]
                : a.kind == AtomKind::Prufer ? pr_pool[pick(5)]
                                             : lo_pool[pick(5)];
        if (v != 0) phi.blocks.push_back({{s}, Scalar(v)});
    }
    // Matrix entries inside the 2-torsion part (slots 0 and 1 of desk()).
    CoordKey c00{0, 0}, c10{1, 0}, c11{1, 1};
    if (pick(2)) phi.matrix.entries[{c00, c10}] = Rat(pick(4));          // Z(4)->Z(2)
    if (pick(2)) phi.matrix.entries[{c10, c00}] = Rat(2 * pick(2));      // Z(2)->Z(4): even
    if (pick(2)) phi.matrix.entries[{c10, c11}] = Rat(pick(2));          // Z(2)->Z(2)
    // Finitary contribution with modulus 4 and target of matching order.
    if (pick(2)) {
        FinitaryContribution fc;
        fc.modulus = 4;
        if (pick(2)) fc.weights[c00] = Rat(1 + pick(3));
        if (pick(2)) fc.weights[c10] = Rat(2 * (1 + pick(2)));  // w*2 ≡ 0 mod 4
        if (pick(2)) fc.weights[{3, 0}] = Rat(4 * (1 + pick(2)));  // v_2 >= 2 on Q[2]
        fc.target = elem1(c00, Rat(pick(2) ? 1 : 2));
        if (!fc.weights.empty()) phi.finitary.contributions.push_back(std::move(fc));
    }
    for (auto it = phi.matrix.entries.begin(); it != phi.matrix.entries.end();)
        it = it->second == 0 ? phi.matrix.entries.erase(it) : std::next(it);
    return phi;
}

Element random_elem(const GroupDescriptor& g, std::mt19937& rng) {
    auto pick = [&](int n) { return (long)(rng() % n); };
    Element e;
    e.coords[{0, 0}] = Rat(pick(4));
    e.coords[{1, 0}] = Rat(pick(2));
    e.coords[{1, 1}] = Rat(pick(2));
    e.coords[{2, 0}] = Rat(pick(9), 9);
    e.coords[{3, 0}] = Rat(pick(7) - 3, pick(2) ? 4 : 1);
    return canonicalize(g, std::move(e));
}

}  // namespace

TEST_CASE("well-definedness of scalar 1/2 across atoms") {
    CHECK(is_well_defined(multiplication(single(Atom::prufer(3)), Rat(1, 2))).ok);
    CHECK_FALSE(is_well_defined(multiplication(single(Atom::localized(PrimeSet{})), Rat(1, 2))).ok);
    CHECK(is_well_defined(multiplication(single(Atom::localized(PrimeSet({2}))), Rat(1, 2))).ok);
}

TEST_CASE("well-definedness diagnostics for matrix and finitary parts") {
    GroupDescriptor g = desk();
    Endomorphism phi = zero_endo(g);
    phi.matrix.entries[{{1, 0}, {0, 0}}] = Rat(1);  // Z(2) -> Z(4) needs an even entry
    auto wd = is_well_defined(phi);
    CHECK_FALSE(wd.ok);
    CHECK(wd.diagnostic.find("matrix entry") != std::string::npos);

    Endomorphism psi = zero_endo(g);
    FinitaryContribution fc;
    fc.modulus = 4;
    fc.weights[{2, 0}] = Rat(1);  // nonzero functional on a Prufer coordinate
    fc.target = elem1({0, 0}, Rat(1));
    psi.finitary.contributions.push_back(fc);
    CHECK_FALSE(is_well_defined(psi).ok);

    Endomorphism rho = zero_endo(g);
    FinitaryContribution ok;
    ok.modulus = 4;
    ok.weights[{0, 0}] = Rat(3);
    ok.weights[{3, 0}] = Rat(4);
    ok.target = elem1({0, 0}, Rat(1));
    rho.finitary.contributions.push_back(ok);
    CHECK(is_well_defined(rho).ok);
}

TEST_CASE("apply: frozen instances") {
    // x2 on Z(5), a = 3 -> 1.
    GroupDescriptor z5 = single(Atom::cyclic(5, 1));
    Element a = elem1({0, 0}, Rat(3));
    CHECK(apply(multiplication(z5, Rat(2)), a) == elem1({0, 0}, Rat(1)));

    // x(1/2) on Z(3^inf), a = 1/3 -> 2/3 (2 * 1/3 = 2/3 and 2 = inverse of 2 mod 3).
    GroupDescriptor p3 = single(Atom::prufer(3));
    Element b = elem1({0, 0}, Rat(1, 3));
    CHECK(apply(multiplication(p3, Rat(1, 2)), b) == elem1({0, 0}, Rat(2, 3)));

    // A zero-weight finitary summand changes nothing.
    Endomorphism id5 = multiplication(z5, Rat(1));
    FinitaryContribution fc;
    fc.modulus = 5;
    fc.weights[{0, 0}] = Rat(0);
    fc.target = elem1({0, 0}, Rat(1));
    id5.finitary.contributions.push_back(fc);
    CHECK(apply(id5, a) == a);
}

TEST_CASE("add and compose: frozen scalar instances") {
    GroupDescriptor z = single(Atom::localized(PrimeSet{}));
    CHECK(add(multiplication(z, Rat(2)), multiplication(z, Rat(3))).scalar_on(0) == Rat(5));

    GroupDescriptor q23 = single(Atom::localized(PrimeSet({2, 3})));
    Endomorphism c = compose(multiplication(q23, Rat(1, 2)), multiplication(q23, Rat(2, 3)));
    CHECK(c.scalar_on(0) == Rat(1, 3));
    CHECK(is_well_defined(c).ok);

    // Blockwise products on B + D.
    GroupDescriptor bd = GroupDescriptor::from_slots({
        {Atom::cyclic(11, 1), Multiplicity::finite(1)},
        {Atom::prufer(13), Multiplicity::finite(1)},
    });
    Endomorphism f = zero_endo(bd), g = zero_endo(bd);
    f.blocks = {{{0}, Scalar(Rat(2))}, {{1}, Scalar(Rat(3))}};
    g.blocks = {{{0}, Scalar(Rat(5))}, {{1}, Scalar(Rat(7))}};
    Endomorphism fg = compose(f, g);
    CHECK(fg.scalar_on(0) == Rat(10));
    CHECK(fg.scalar_on(1) == Rat(21));
}

TEST_CASE("image_finite: frozen instances") {
    GroupDescriptor z2w =
        GroupDescriptor::from_slots({{Atom::cyclic(2, 1), Multiplicity::w()}});
    CHECK(image_finite(zero_endo(z2w)) == SectionSize::finite(1));

    GroupDescriptor z = single(Atom::localized(PrimeSet{}));
    CHECK(image_finite(multiplication(z, Rat(1))).kind == SectionSize::Kind::CertifiedInfinite);

    // Surjective finitary map Z -> Z(2): image of size 2.
    GroupDescriptor g = GroupDescriptor::from_slots({
        {Atom::localized(PrimeSet{}), Multiplicity::finite(1)},
        {Atom::cyclic(2, 1), Multiplicity::finite(1)},
    });
    Endomorphism phi = zero_endo(g);
    FinitaryContribution fc;
    fc.modulus = 2;
    fc.weights[{0, 0}] = Rat(1);
    fc.target = elem1({1, 0}, Rat(1));
    phi.finitary.contributions.push_back(fc);
    REQUIRE(is_well_defined(phi).ok);
    CHECK(image_finite(phi) == SectionSize::finite(2));
}

TEST_CASE("image_finite: pi-divisions of a localized source are covered") {
    // phi: Q[2] -> Z(3), e |-> e mod 3. Images of 1/2^k sweep all residues;
    // the image is the whole Z(3) even though phi(1) generates it already,
    // and the division BFS must not loop forever.
    GroupDescriptor g = GroupDescriptor::from_slots({
        {Atom::localized(PrimeSet({2})), Multiplicity::finite(1)},
        {Atom::cyclic(3, 2), Multiplicity::finite(1)},
    });
    Endomorphism phi = zero_endo(g);
    phi.matrix.entries[{{0, 0}, {1, 0}}] = Rat(3);
    REQUIRE(is_well_defined(phi).ok);
    CHECK(image_finite(phi) == SectionSize::finite(3));
}

TEST_CASE("equal_mod_finitary: frozen instances") {
    GroupDescriptor g = GroupDescriptor::from_slots({
        {Atom::localized(PrimeSet{}), Multiplicity::finite(1)},
        {Atom::cyclic(3, 1), Multiplicity::finite(1)},
    });
    Endomorphism two = multiplication(g, Rat(2));
    auto [eq0, s0] = equal_mod_finitary(two, two);
    CHECK(eq0);
    CHECK(s0 == SectionSize::finite(1));

    Endomorphism twoF = two;
    FinitaryContribution fc;
    fc.modulus = 3;
    fc.weights[{0, 0}] = Rat(1);
    fc.target = elem1({1, 0}, Rat(1));
    twoF.finitary.contributions.push_back(fc);
    REQUIRE(is_well_defined(twoF).ok);
    auto [eq1, s1] = equal_mod_finitary(two, twoF);
    CHECK(eq1);
    CHECK(s1 == SectionSize::finite(3));

    GroupDescriptor z = single(Atom::localized(PrimeSet{}));
    auto [eq2, s2] = equal_mod_finitary(multiplication(z, Rat(2)), multiplication(z, Rat(3)));
    CHECK_FALSE(eq2);
    CHECK(s2.kind == SectionSize::Kind::CertifiedInfinite);
}

TEST_CASE("restrict and induced_on_quotient: frozen instances") {
    GroupDescriptor z = single(Atom::localized(PrimeSet{}));
    SubgroupHandle threeZ;
    threeZ.generators = {elem1({0, 0}, Rat(3))};
    Endomorphism r = restrict(multiplication(z, Rat(2)), threeZ);
    REQUIRE(r.ambient.slots.size() == 1);
    CHECK(r.ambient.slots[0].atom == Atom::localized(PrimeSet{}));
    CHECK(r.scalar_on(0) == Rat(2));

    // V = Z[1/2] inside Q[2] is everything: the quotient is trivial.
    GroupDescriptor q2 = single(Atom::localized(PrimeSet({2})));
    SubgroupHandle v;
    v.generators = {elem1({0, 0}, Rat(1))};
    v.divisibleClosure[0] = PrimeSet({2});
    Endomorphism q = induced_on_quotient(multiplication(q2, Rat(1, 2)), v);
    CHECK(q.ambient.slots.empty());

    // x5 on Z induces x5 = x2 on Z/3Z.
    Endomorphism m = induced_on_quotient(multiplication(z, Rat(5)), threeZ);
    REQUIRE(m.ambient.slots.size() == 1);
    CHECK(m.ambient.slots[0].atom == Atom::cyclic(3, 1));
    CHECK(acts_as_scalar(m, Rat(2)));
}

TEST_CASE("invert: scalars and a matrix block") {
    GroupDescriptor q23 = single(Atom::localized(PrimeSet({2, 3})));
    CHECK(invert(multiplication(q23, Rat(2, 3))).scalar_on(0) == Rat(3, 2));

    GroupDescriptor p3 = single(Atom::prufer(3));
    CHECK(invert(multiplication(p3, Rat(1, 2))).scalar_on(0) == Rat(2));

    // Swap of the two Z(2) copies is its own inverse.
    GroupDescriptor g = GroupDescriptor::from_slots({
        {Atom::cyclic(2, 1), Multiplicity::finite(2)},
    });
    Endomorphism swp = zero_endo(g);
    swp.matrix.entries[{{0, 0}, {0, 1}}] = Rat(1);
    swp.matrix.entries[{{0, 1}, {0, 0}}] = Rat(1);
    REQUIRE(is_well_defined(swp).ok);
    Endomorphism inv = invert(swp);
    CHECK(acts_as_scalar(compose(inv, swp), Rat(1)));
    CHECK(inv.matrix.entries == swp.matrix.entries);

    // Non-invertible: x2 on Z.
    GroupDescriptor z = single(Atom::localized(PrimeSet{}));
    CHECK_THROWS_AS((void)invert(multiplication(z, Rat(2))), std::domain_error);
    // Invertible after verification fails: x3 on Z(9) works, x3 on Z(3) is zero.
    CHECK(invert(multiplication(single(Atom::cyclic(2, 2)), Rat(3))).scalar_on(0) == Rat(1, 3));
    CHECK_THROWS_AS((void)invert(multiplication(single(Atom::cyclic(3, 1)), Rat(3))),
                    std::domain_error);
}

TEST_CASE("ring axioms via apply-equality on random triples") {
    GroupDescriptor g = desk();
    std::mt19937 rng(20260827);
    for (int it = 0; it < 60; ++it) {
        Endomorphism f = random_endo(g, rng), h = random_endo(g, rng),
                     k = random_endo(g, rng);
        REQUIRE(is_well_defined(f).ok);
        REQUIRE(is_well_defined(h).ok);
        REQUIRE(is_well_defined(k).ok);
        Endomorphism fh = add(f, h), hf = add(h, f);
        Endomorphism comp = compose(f, h);
        Endomorphism distL = compose(f, add(h, k));
        Endomorphism distR = add(compose(f, h), compose(f, k));
        REQUIRE(is_well_defined(fh).ok);
        REQUIRE(is_well_defined(comp).ok);
        for (int jt = 0; jt < 6; ++jt) {
            Element a = random_elem(g, rng), b = random_elem(g, rng);
            // Additivity of apply.
            CHECK(apply(f, elem_add(g, a, b)) ==
                  elem_add(g, apply(f, a), apply(f, b)));
            // add commutes; compose is composition; distributivity.
            CHECK(apply(fh, a) == apply(hf, a));
            CHECK(apply(fh, a) == elem_add(g, apply(f, a), apply(h, a)));
            CHECK(apply(comp, a) == apply(f, apply(h, a)));
            CHECK(apply(distL, a) == apply(distR, a));
            CHECK(apply(add(f, negate(f)), a).is_zero());
        }
    }
}

TEST_CASE("associativity of compose via apply-equality") {
    GroupDescriptor g = desk();
    std::mt19937 rng(7);
    for (int it = 0; it < 30; ++it) {
        Endomorphism f = random_endo(g, rng), h = random_endo(g, rng),
                     k = random_endo(g, rng);
        Endomorphism l = compose(compose(f, h), k), r = compose(f, compose(h, k));
        for (int jt = 0; jt < 5; ++jt) {
            Element a = random_elem(g, rng);
            CHECK(apply(l, a) == apply(r, a));
        }
    }
}

TEST_CASE("F(A) is an ideal: finite images are stable under add and compose") {
    GroupDescriptor g = desk();
    std::mt19937 rng(99);
    // Strip scalar action on the infinite slots (Prufer and Localized) so the
    // sampled endomorphism has finite image.
    auto make_finite = [&](Endomorphism e) {
        std::vector<ScalarBlock> kept;
        for (auto& b : e.blocks) {
            b.slots.erase(2);
            b.slots.erase(3);
            if (!b.slots.empty()) kept.push_back(b);
        }
        e.blocks = std::move(kept);
        return e;
    };
    int finite_pairs = 0;
    for (int it = 0; it < 40; ++it) {
        Endomorphism f = make_finite(random_endo(g, rng));
        Endomorphism h = make_finite(random_endo(g, rng));
        Endomorphism any = random_endo(g, rng);
        SectionSize sf = image_finite(f), sh = image_finite(h);
        REQUIRE(sf.kind == SectionSize::Kind::Finite);
        REQUIRE(sh.kind == SectionSize::Kind::Finite);
        ++finite_pairs;
        SectionSize sum = image_finite(add(f, h));
        REQUIRE(sum.kind == SectionSize::Kind::Finite);
        CHECK(sum.n <= sf.n * sh.n);
        // compose with a finite-image factor on either side stays finite
        CHECK(image_finite(compose(f, any)).kind == SectionSize::Kind::Finite);
        CHECK(image_finite(compose(any, f)).kind == SectionSize::Kind::Finite);
    }
    CHECK(finite_pairs == 40);
}

TEST_CASE("equal_mod_finitary is an equivalence on a sampled set") {
    GroupDescriptor g = desk();
    std::mt19937 rng(1234);
    std::vector<Endomorphism> pool;
    for (int i = 0; i < 8; ++i) pool.push_back(random_endo(g, rng));
    for (const auto& f : pool) CHECK(equal_mod_finitary(f, f).first);
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (std::size_t j = 0; j < pool.size(); ++j) {
            bool ij = equal_mod_finitary(pool[i], pool[j]).first;
            CHECK(ij == equal_mod_finitary(pool[j], pool[i]).first);
            if (!ij) continue;
            for (std::size_t k = 0; k < pool.size(); ++k)
                if (equal_mod_finitary(pool[j], pool[k]).first)
                    CHECK(equal_mod_finitary(pool[i], pool[k]).first);
        }
}

TEST_CASE("apply respects the relations of a presented group") {
    // fg{2 -2} = Z x Z / <2x = 2y>: multiplication by 3 is additive and the
    // relation evaluates to zero.
    GroupDescriptor g = GroupDescriptor::from_presentation(Mat(1, 2, {2, -2}));
    Endomorphism phi = multiplication(g, Rat(3));
    Element x = elem_from_generators(g, {1, 0});
    Element y = elem_from_generators(g, {0, 1});
    Element rel = elem_add(g, elem_scale(g, Rat(2), x), elem_scale(g, Rat(-2), y));
    CHECK(rel.is_zero());
    CHECK(apply(phi, elem_add(g, x, y)) == elem_add(g, apply(phi, x), apply(phi, y)));
}
