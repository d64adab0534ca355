#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "inertia/finite_oracle.hpp"

using namespace inertia;

namespace {

bool mask_subset(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] & ~b[i]) return false;
    return true;
}

std::vector<std::vector<Int>> rows_of(std::initializer_list<std::vector<Int>> l) { return l; }

}  // namespace

TEST_CASE("subgroup counts: frozen desk instances") {
    CHECK(enumerate_subgroups(FiniteAbelianGroup::from_orders({4})).subgroups.size() == 3);
    CHECK(enumerate_subgroups(FiniteAbelianGroup::from_orders({2, 2})).subgroups.size() == 5);
    CHECK(enumerate_subgroups(FiniteAbelianGroup::from_orders({4, 2})).subgroups.size() == 8);
}

TEST_CASE("subgroup count at scale matches the Gaussian-binomial value") {
    // Subspaces of F_2^6: sum of the q-binomials 1+63+651+1395+651+63+1.
    FiniteAbelianGroup G = FiniteAbelianGroup::from_orders({2, 2, 2, 2, 2, 2});
    CHECK(count_subgroups(G) == 2825);
}

TEST_CASE("product formula across coprime components") {
    auto count = [](std::vector<Int> orders) {
        return count_subgroups(FiniteAbelianGroup::from_orders(orders));
    };
    CHECK(count({4, 2, 9}) == count({4, 2}) * count({9}));
    CHECK(count({8, 3, 3}) == count({8}) * count({3, 3}));
    CHECK(count({2, 2, 25}) == count({2, 2}) * count({25}));
}

TEST_CASE("phi_closure_up: frozen instances") {
    FiniteAbelianGroup G = FiniteAbelianGroup::from_orders({3, 3});
    Mat swap(2, 2, {0, 1, 1, 0});

    // X = <(1,0)>, swap closure = whole group.
    auto up = phi_closure_up(G, rows_of({{Int(1), Int(0)}}), {swap});
    CHECK(up.order == 9);

    // Invariant subgroup: the diagonal.
    auto diag = phi_closure_up(G, rows_of({{Int(1), Int(1)}}), {swap});
    CHECK(diag.order == 3);

    // Empty action.
    auto none = phi_closure_up(G, rows_of({{Int(1), Int(0)}}), {});
    CHECK(none.order == 3);
}

TEST_CASE("phi_closure_down: frozen instances") {
    FiniteAbelianGroup G = FiniteAbelianGroup::from_orders({3, 3});
    Mat swap(2, 2, {0, 1, 1, 0});

    auto down = phi_closure_down(G, rows_of({{Int(1), Int(0)}}), {swap});
    CHECK(down.order == 1);

    auto diag = phi_closure_down(G, rows_of({{Int(1), Int(1)}}), {swap});
    CHECK(diag.order == 3);

    auto whole = phi_closure_down(G, rows_of({{Int(1), Int(0)}, {Int(0), Int(1)}}), {swap});
    CHECK(whole.order == 9);
}

TEST_CASE("closure containment, invariance, monotonicity (exhaustive on a desk group)") {
    FiniteAbelianGroup G = FiniteAbelianGroup::from_orders({4, 2, 2});
    auto table = enumerate_subgroups(G);
    std::mt19937 rng(42);
    std::vector<Mat> phis;
    for (int i = 0; i < 3; ++i) phis.push_back(random_endo_matrix(G, rng));

    std::vector<OracleSubgroup> ups, downs;
    for (const auto& s : table.subgroups) {
        auto up = phi_closure_up(G, s.gens, phis);
        auto down = phi_closure_down(G, s.gens, phis);
        // X_Phi <= X <= X^Phi
        CHECK(mask_subset(down.mask, s.mask));
        CHECK(mask_subset(s.mask, up.mask));
        // invariance: closing again is a fixed point
        CHECK(phi_closure_up(G, up.gens, phis).order == up.order);
        CHECK(phi_closure_down(G, down.gens, phis).order == down.order);
        ups.push_back(std::move(up));
        downs.push_back(std::move(down));
    }
    // Monotonicity on randomized pairs.
    for (int t = 0; t < 200; ++t) {
        std::size_t i = rng() % table.subgroups.size(), j = rng() % table.subgroups.size();
        if (!mask_subset(table.subgroups[i].mask, table.subgroups[j].mask)) continue;
        CHECK(mask_subset(ups[i].mask, ups[j].mask));
        CHECK(mask_subset(downs[i].mask, downs[j].mask));
    }
    // Table closure under join and intersection (via masks).
    auto find_mask = [&](const std::vector<std::uint64_t>& m) {
        for (const auto& s : table.subgroups)
            if (s.mask == m) return true;
        return false;
    };
    for (int t = 0; t < 50; ++t) {
        std::size_t i = rng() % table.subgroups.size(), j = rng() % table.subgroups.size();
        auto meet = table.subgroups[i].mask;
        for (std::size_t w = 0; w < meet.size(); ++w) meet[w] &= table.subgroups[j].mask[w];
        CHECK(find_mask(meet));
        std::vector<std::vector<Int>> joint = table.subgroups[i].gens;
        for (const auto& r : table.subgroups[j].gens) joint.push_back(r);
        CHECK(find_mask(subgroup_from_generators(G, joint).mask));
    }
}

TEST_CASE("duality: adjoint up-closure of the annihilator measures |X/X_phi|") {
    FiniteAbelianGroup G = FiniteAbelianGroup::from_orders({8, 4, 2});
    auto table = enumerate_subgroups(G);
    std::mt19937 rng(7);
    for (int t = 0; t < 5; ++t) {
        Mat phi = random_endo_matrix(G, rng);
        Mat adj = adjoint_matrix(G, phi);
        for (std::size_t i = 0; i < table.subgroups.size(); i += 3) {
            const auto& X = table.subgroups[i];
            Int direct = X.order / phi_closure_down(G, X.gens, {phi}).order;
            auto ann = annihilator(G, X.gens);
            Int dual = phi_closure_up(G, ann.gens, {adj}).order / ann.order;
            CHECK(direct == dual);
        }
    }
}

TEST_CASE("annihilator has complementary order and is involutive") {
    FiniteAbelianGroup G = FiniteAbelianGroup::from_orders({8, 4, 2});
    auto table = enumerate_subgroups(G);
    for (const auto& X : table.subgroups) {
        auto ann = annihilator(G, X.gens);
        CHECK(ann.order * X.order == G.order());
        CHECK(annihilator(G, ann.gens).mask == X.mask);
    }
}

TEST_CASE("check_closure_bound: frozen instances") {
    // Multiplications fix every subgroup.
    FiniteAbelianGroup G1 = FiniteAbelianGroup::from_orders({4, 2});
    Mat mult3(2, 2, {3, 0, 0, 3});
    auto r1 = check_closure_bound(G1, mult3);
    CHECK(r1.m == 0);
    CHECK(r1.worst == 0);
    CHECK(r1.holds);

    // Swap on Z(2)^2.
    FiniteAbelianGroup G2 = FiniteAbelianGroup::from_orders({2, 2});
    auto r2 = check_closure_bound(G2, Mat(2, 2, {0, 1, 1, 0}));
    CHECK(r2.m == 1);
    CHECK(r2.worst == 1);
    CHECK(r2.holds);

    // Cyclic shift on Z(3)^3.
    FiniteAbelianGroup G3 = FiniteAbelianGroup::from_orders({3, 3, 3});
    auto r3 = check_closure_bound(G3, Mat(3, 3, {0, 1, 0, 0, 0, 1, 1, 0, 0}));
    CHECK(r3.holds);
}

TEST_CASE("lemma bound holds for random endomorphisms on small p-groups") {
    std::mt19937 rng(2026);
    std::vector<std::vector<Int>> shapes = {{2, 2, 2, 2}, {4, 4}, {8, 2}, {16},
                                            {3, 3, 3},    {9, 3}, {27}};
    for (const auto& shape : shapes) {
        FiniteAbelianGroup G = FiniteAbelianGroup::from_orders(shape);
        std::vector<Mat> phis;
        for (int i = 0; i < 10; ++i) phis.push_back(random_endo_matrix(G, rng));
        for (const auto& res : check_closure_bound_batch(G, phis)) {
            CHECK(res.holds);
            CHECK(res.worst <= res.m * res.m);
        }
    }
}

TEST_CASE("fs_bound: multiplications give 1; the shear is validated against masks") {
    FiniteAbelianGroup G = FiniteAbelianGroup::from_orders({4, 2});
    Mat mult5(2, 2, {5, 0, 0, 5});
    CHECK(fs_bound(G, {mult5, Mat(2, 2, {3, 0, 0, 3})}) == 1);
    CHECK(fs_bound(G, {}) == 1);

    Mat shear(2, 2, {1, 1, 0, 1});
    Int expected = 1;
    for (const auto& X : enumerate_subgroups(G).subgroups) {
        Int up = phi_closure_up(G, X.gens, {shear}).order;
        Int down = phi_closure_down(G, X.gens, {shear}).order;
        Int quotient = up / down;
        if (quotient > expected) expected = quotient;
    }
    CHECK(fs_bound(G, {shear}) == expected);
    CHECK(expected > 1);
}

TEST_CASE("endo_to_matrix bridges structured endomorphisms") {
    GroupDescriptor g = GroupDescriptor::from_slots({
        {Atom::cyclic(2, 2), Multiplicity::finite(1)},
        {Atom::cyclic(2, 1), Multiplicity::finite(2)},
    });
    FiniteAbelianGroup G = FiniteAbelianGroup::from_descriptor(g);
    REQUIRE(G.dim() == 3);
    Endomorphism phi = multiplication(g, Rat(3));
    phi.matrix.entries[{{1, 0}, {1, 1}}] = Rat(1);
    Mat m = endo_to_matrix(G, phi);
    CHECK(m(0, 0) == 3);
    CHECK(m(1, 2) == 1);
    CHECK(matrix_well_defined(G, m));
}

TEST_CASE("cyclic_module: frozen instances") {
    // Multiplication, generator of order 8.
    GroupDescriptor z8 = GroupDescriptor::from_slots({{Atom::cyclic(2, 3), Multiplicity::finite(1)}});
    Element a;
    a.coords[{0, 0}] = Rat(1);
    auto m1 = cyclic_module(z8, a, multiplication(z8, Rat(3)));
    CHECK(m1.status == CyclicModuleStatus::Finite);
    CHECK(m1.order == Int(8));

    // Swap on Z(2)^2 starting from (1,0): the whole group.
    GroupDescriptor z22 = GroupDescriptor::from_slots({{Atom::cyclic(2, 1), Multiplicity::finite(2)}});
    Endomorphism swp = zero_endo(z22);
    swp.matrix.entries[{{0, 0}, {0, 1}}] = Rat(1);
    swp.matrix.entries[{{0, 1}, {0, 0}}] = Rat(1);
    auto m2 = cyclic_module(z22, a, swp);
    CHECK(m2.status == CyclicModuleStatus::Finite);
    CHECK(m2.order == Int(4));

    // x2 on Z from a = 1: finitely generated but infinite.
    GroupDescriptor z = GroupDescriptor::from_slots({{Atom::localized(PrimeSet{}), Multiplicity::finite(1)}});
    auto m3 = cyclic_module(z, a, multiplication(z, Rat(2)));
    CHECK(m3.status == CyclicModuleStatus::InfiniteFG);
    CHECK(m3.torsion_order == Int(1));
}
