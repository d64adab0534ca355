#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "inertia/gallery.hpp"
#include "inertia/witness.hpp"

using namespace inertia;

TEST_CASE("q_omega_doubling: RIN without LIN, inverse swaps the properties") {
    GalleryEntry e = q_omega_doubling();
    Verdict v = classify_general(e.endos, e.group);
    CHECK(v.rin == e.expected_rin);
    CHECK(v.lin == e.expected_lin);
    AutomorphismBridge b = automorphism_bridge(e.endos[0], e.group);
    CHECK(b.rin);
    CHECK(!b.lin);
    CHECK(!b.rin_inv);
    CHECK(b.lin_inv);
    // The inverse's RIN failure is certified by the free-rank family.
    NonInertialWitness w = free_rank_witness(e.group, Rat(1, 2));
    CHECK(verify_witness(w, multiplication(e.group, Rat(1, 2))).ok);
}

TEST_CASE("critical_id_inversion(3, 1, 1): inertial, periodic, non-finitary") {
    GalleryEntry e = critical_id_inversion(3, 1, 1);
    Verdict v = classify_general(e.endos, e.group);
    CHECK(v.rin);
    CHECK(v.lin);
    CHECK(acts_as_scalar(compose(e.endos[0], e.endos[0]), Rat(1)));
    Endomorphism dev = add(e.endos[0], negate(multiplication(e.group, Rat(1))));
    CHECK(image_finite(dev).kind == SectionSize::CertifiedInfinite);
    auto [cok, csz] = commutator_check(e.endos[0], multiplication(e.group, Rat(2)));
    CHECK(cok);
    CHECK(csz == SectionSize::finite(1));
}

TEST_CASE("critical_id_inversion parameter guards") {
    CHECK_THROWS_AS(critical_id_inversion(2, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(critical_id_inversion(9, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(critical_id_inversion(3, 0, 1), std::invalid_argument);
}

TEST_CASE("proposition_a(5): torsion part and series data") {
    PropositionAModel m = proposition_a(5);
    CHECK(m.primes == std::vector<Int>{2, 3, 5});
    // Torsion part is Z(2) + Z(3) + Z(5) and the free rank is one.
    GroupDescriptor tp = torsion_part(m.entry.group);
    CHECK(tp.is_finite());
    CHECK(tp.torsion_primes() == std::set<Int>{2, 3, 5});
    Int order = 1;
    for (const auto& sl : tp.slots)
        order *= pow_int(sl.atom.order(), sl.mult.count);
    CHECK(order == 30);
    CHECK(!m.entry.group.r0().omega);
    CHECK(m.entry.group.r0().count == 1);
    // t_p = p*d_p - v has order exactly p.
    for (std::size_t i = 0; i < m.primes.size(); ++i) {
        auto ord = elem_order(m.entry.group, m.t[i]);
        REQUIRE(ord.has_value());
        CHECK(*ord == m.primes[i]);
    }
}

TEST_CASE("proposition_a: sigma is inertial and sigma - id has the exact image") {
    PropositionAModel m = proposition_a(5);
    const GroupDescriptor& g = m.entry.group;
    std::vector<std::vector<Int>> coeffs = {
        {1, 1, 1}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 2, 4}, {0, 0, 0}, {1, 0, 3}};
    for (const auto& s : coeffs) {
        Endomorphism sig = m.sigma(s);
        CHECK(classify_general({sig}, g).rin);
        Int expected = 1;
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s[i] % m.primes[i] != 0) expected *= m.primes[i];
        SectionSize img = image_finite(add(sig, negate(multiplication(g, Rat(1)))));
        CHECK(img == SectionSize::finite(expected));
        // sigma stabilizes the series: identity on V + T.
        for (const auto& gen : m.vt.generators) CHECK(apply(sig, gen) == gen);
    }
}

TEST_CASE("proposition_a: sigma is additive in s and sigmas commute exactly") {
    PropositionAModel m = proposition_a(5);
    const GroupDescriptor& g = m.entry.group;
    std::vector<Int> s1 = {1, 2, 3}, s2 = {1, 1, 4}, sum = {2, 3, 7};
    Endomorphism a = m.sigma(s1), b = m.sigma(s2);
    Endomorphism ab = compose(a, b), ba = compose(b, a);
    Endomorphism expected = m.sigma(sum);
    // Stabilizer composition law: sigma(s)sigma(t) = sigma(s + t), checked
    // pointwise on the generating set.
    for (const auto& gen : {m.v, m.d[0], m.d[1], m.d[2]}) {
        CHECK(apply(ab, gen) == apply(expected, gen));
        CHECK(apply(ab, gen) == apply(ba, gen));
    }
}

TEST_CASE("run_gallery_entry covers every registered name") {
    for (const auto& name : gallery_names()) {
        auto [ok, report] = run_gallery_entry(name);
        INFO(report);
        CHECK(ok);
    }
    CHECK(!run_gallery_entry("no_such_entry").first);
}
