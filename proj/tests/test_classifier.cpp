#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "inertia/classifier.hpp"

using namespace inertia;

namespace {

GroupDescriptor make_group(std::vector<Slot> slots) {
    return GroupDescriptor::from_slots(std::move(slots));
}

Slot cyc(Int p, long e, Multiplicity m) { return {Atom::cyclic(std::move(p), e), m}; }
Slot pruf(Int p, Multiplicity m = Multiplicity::finite(1)) {
    return {Atom::prufer(std::move(p)), m};
}
Slot loc(std::set<Int> pi, Multiplicity m = Multiplicity::finite(1)) {
    return {Atom::localized(PrimeSet(std::move(pi))), m};
}
Slot loc_all(Multiplicity m) { return {Atom::localized(PrimeSet::all()), m}; }
Slot free_slot(Multiplicity m) { return {Atom::localized(PrimeSet()), m}; }

// Blockwise endomorphism from one scalar per slot.
Endomorphism blockwise(const GroupDescriptor& g, std::vector<Rat> scalars) {
    Endomorphism phi = zero_endo(g);
    for (std::size_t s = 0; s < scalars.size(); ++s)
        phi.blocks.push_back({{s}, Scalar(std::move(scalars[s]))});
    return phi;
}

void check_inertial(const Verdict& v, const std::vector<Endomorphism>& phis,
                    const GroupDescriptor& a) {
    REQUIRE(v.rin);
    REQUIRE(v.certificate.has_value());
    CHECK(validate_certificate(*v.certificate, phis, a).empty());
    CHECK(!v.witness.has_value());
}

void check_witnessed(const Verdict& v, const Endomorphism& phi) {
    REQUIRE(!v.rin);
    REQUIRE(v.witness.has_value());
    CHECK(verify_witness(*v.witness, phi).ok);
    CHECK(!v.certificate.has_value());
}

}  // namespace

// ---------------------------------------------------------------------------
// classify_multiplication
// ---------------------------------------------------------------------------

TEST_CASE("x2 on Q^omega: RIN but not LIN") {
    GroupDescriptor g = make_group({loc_all(Multiplicity::w())});
    Verdict v = classify_multiplication(Scalar(Rat(2)), g);
    CHECK(v.rin);
    CHECK(!v.lin);
    REQUIRE(v.certificate.has_value());
    CHECK(v.certificate->kind == InertialCertificate::Kind::CaseA);
    CHECK(v.certificate->m == std::vector<Int>{Int(2)});
}

TEST_CASE("x1/2 on Q^omega: LIN but not RIN, free-rank witness") {
    GroupDescriptor g = make_group({loc_all(Multiplicity::w())});
    Verdict v = classify_multiplication(Scalar(Rat(1, 2)), g);
    CHECK(!v.rin);
    CHECK(v.lin);
    REQUIRE(v.witness.has_value());
    CHECK(v.witness->kind == WitnessKind::FreeRank);
    CHECK(verify_witness(*v.witness, multiplication(g, Rat(1, 2))).ok);
}

TEST_CASE("x0 on infinite groups: RIN but not LIN") {
    for (GroupDescriptor g :
         {make_group({free_slot(Multiplicity::finite(1))}),
          make_group({cyc(3, 1, Multiplicity::w())}),
          make_group({pruf(5), cyc(2, 2, Multiplicity::finite(3))})}) {
        Verdict v = classify_multiplication(Scalar(Rat(0)), g);
        CHECK(v.rin);
        CHECK(!v.lin);
    }
}

TEST_CASE("x5/3 on Z(2^inf)+Q[3]: RIN at finite torsion-free rank") {
    GroupDescriptor g = make_group({pruf(2), loc({3})});
    Verdict v = classify_multiplication(Scalar(Rat(5, 3)), g);
    CHECK(v.rin);
    REQUIRE(v.certificate.has_value());
    CHECK(validate_certificate(*v.certificate, {multiplication(g, Rat(5, 3))}, g).empty());
}

TEST_CASE("multiplication on p-groups: invertible or Min") {
    // x3 on Z(3)^omega: 3 acts as 0, no Min.
    Verdict a = classify_multiplication(Scalar(Rat(3)), make_group({cyc(3, 1, Multiplicity::w())}));
    CHECK(a.rin);
    CHECK(!a.lin);
    // x3 on Z(3^inf): not invertible but Min holds.
    Verdict b = classify_multiplication(Scalar(Rat(3)), make_group({pruf(3)}));
    CHECK(b.rin);
    CHECK(b.lin);
    // x2 on Z(3)^omega: invertible mod 3.
    Verdict c = classify_multiplication(Scalar(Rat(2)), make_group({cyc(3, 1, Multiplicity::w())}));
    CHECK(c.rin);
    CHECK(c.lin);
}

TEST_CASE("multiplication at 0 < r0 < infinity: Min of the numerator component") {
    // x2 on Z(2)^omega + Z: A_{pi(2)} = Z(2)^omega has no Min.
    GroupDescriptor g1 = make_group({cyc(2, 1, Multiplicity::w()), free_slot(Multiplicity::finite(1))});
    Verdict v1 = classify_multiplication(Scalar(Rat(2)), g1);
    CHECK(v1.rin);
    CHECK(!v1.lin);
    // x2 on Z(2^inf) + Z: A_{pi(2)} = Z(2^inf) has Min.
    GroupDescriptor g2 = make_group({pruf(2), free_slot(Multiplicity::finite(1))});
    Verdict v2 = classify_multiplication(Scalar(Rat(2)), g2);
    CHECK(v2.rin);
    CHECK(v2.lin);
}

TEST_CASE("ill-defined scalar is rejected") {
    CHECK_THROWS_AS(classify_multiplication(Scalar(Rat(1, 2)),
                                            make_group({free_slot(Multiplicity::finite(1))})),
                    std::invalid_argument);
}

// ---------------------------------------------------------------------------
// classify_torsion_free
// ---------------------------------------------------------------------------

TEST_CASE("shear on Z^2: not RIN, independence witness on (0,1)") {
    GroupDescriptor g = make_group({free_slot(Multiplicity::finite(2))});
    Endomorphism phi = zero_endo(g);
    phi.blocks.push_back({{0}, Scalar(Rat(1))});
    phi.matrix.entries[{CoordKey{0, 1}, CoordKey{0, 0}}] = Rat(1);  // e1 -> e0 + e1
    Verdict v = classify_torsion_free(phi, g);
    CHECK(!v.lin);
    check_witnessed(v, phi);
    CHECK(v.witness->kind == WitnessKind::Independence);
    CHECK(v.witness->generator == unit_element(g, {0, 1}));
}

TEST_CASE("integer multiplication on Z^omega: CaseA") {
    GroupDescriptor g = make_group({free_slot(Multiplicity::w())});
    Endomorphism phi = multiplication(g, Rat(3));
    Verdict v = classify_torsion_free(phi, g);
    check_inertial(v, {phi}, g);
    CHECK(v.certificate->kind == InertialCertificate::Kind::CaseA);
    CHECK(v.certificate->m == std::vector<Int>{Int(3)});
}

TEST_CASE("x1/3 on Q[3]^omega: LIN (m = 1)") {
    GroupDescriptor g = make_group({loc({3}, Multiplicity::w())});
    Endomorphism phi = multiplication(g, Rat(1, 3));
    Verdict v = classify_torsion_free(phi, g);
    CHECK(!v.rin);
    CHECK(v.lin);
    check_witnessed(v, phi);
}

TEST_CASE("classify_torsion_free rejects torsion slots") {
    GroupDescriptor g = make_group({cyc(2, 1, Multiplicity::finite(1))});
    CHECK_THROWS_AS(classify_torsion_free(multiplication(g, Rat(1)), g),
                    std::invalid_argument);
}

// ---------------------------------------------------------------------------
// classify_periodic
// ---------------------------------------------------------------------------

TEST_CASE("identity on B + inversion on D, B=Z(3)^omega, D=Z(3^inf): inertial both ways") {
    GroupDescriptor g = make_group({cyc(3, 1, Multiplicity::w()), pruf(3)});
    Endomorphism phi = blockwise(g, {Rat(1), Rat(-1)});
    Verdict v = classify_periodic({phi}, g);
    CHECK(v.lin);
    check_inertial(v, {phi}, g);
    REQUIRE(v.certificate->kind == InertialCertificate::Kind::CaseB);
    CHECK(v.certificate->pi.empty());
    CHECK(v.certificate->pi1.contains(3));
    CHECK(v.certificate->b_slots == std::vector<std::size_t>{0});
    CHECK(v.certificate->d_slots == std::vector<std::size_t>{1});
    CHECK(v.certificate->rank_v == 0);
}

TEST_CASE("x3 on Z(3)^omega: RIN, not LIN") {
    GroupDescriptor g = make_group({cyc(3, 1, Multiplicity::w())});
    Endomorphism phi = multiplication(g, Rat(3));
    Verdict v = classify_periodic({phi}, g);
    CHECK(!v.lin);
    check_inertial(v, {phi}, g);
    CHECK(v.certificate->kind == InertialCertificate::Kind::CaseA);
}

TEST_CASE("independent integer blocks across primes are inertial") {
    GroupDescriptor g = make_group(
        {cyc(2, 1, Multiplicity::w()), cyc(3, 1, Multiplicity::w()), pruf(5)});
    Endomorphism phi = blockwise(g, {Rat(1), Rat(2), Rat(7)});
    Verdict v = classify_periodic({phi}, g);
    CHECK(v.lin);  // each prime is invertible or has Min
    check_inertial(v, {phi}, g);
}

TEST_CASE("diverging scalars on the same unbounded prime are not inertial") {
    // Two Z(3)-towers with scalars 1 and 2: no single multiplication mod 3.
    GroupDescriptor g = make_group({cyc(3, 1, Multiplicity::w()), cyc(3, 2, Multiplicity::w())});
    Endomorphism phi = blockwise(g, {Rat(1), Rat(2)});
    Verdict v = classify_periodic({phi}, g);
    check_witnessed(v, phi);
    CHECK(!v.lin);
}

TEST_CASE("two quasi-cyclic p-components need one p-adic scalar") {
    GroupDescriptor g = make_group({pruf(3), pruf(3)});
    Endomorphism good = blockwise(g, {Rat(2), Rat(2)});
    check_inertial(classify_periodic({good}, g), {good}, g);
    Endomorphism bad = blockwise(g, {Rat(2), Rat(5)});
    check_witnessed(classify_periodic({bad}, g), bad);
}

TEST_CASE("classify_periodic rejects non-periodic ambients") {
    GroupDescriptor g = make_group({free_slot(Multiplicity::finite(1))});
    CHECK_THROWS_AS(classify_periodic({multiplication(g, Rat(1))}, g), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// classify_general
// ---------------------------------------------------------------------------

TEST_CASE("identity is CaseA with m = 1 on any supported group") {
    for (GroupDescriptor g :
         {make_group({pruf(2), cyc(3, 1, Multiplicity::w()), loc({2})}),
          make_group({loc_all(Multiplicity::w())}),
          make_group({cyc(2, 3, Multiplicity::finite(2))})}) {
        Endomorphism id = multiplication(g, Rat(1));
        Verdict v = classify_general({id}, g);
        check_inertial(v, {id}, g);
        CHECK(v.certificate->kind == InertialCertificate::Kind::CaseA);
        CHECK(v.certificate->m == std::vector<Int>{Int(1)});
    }
}

TEST_CASE("trivial group: CaseA with m = 0") {
    GroupDescriptor g = make_group({});
    Verdict v = classify_general({zero_endo(g)}, g);
    CHECK(v.rin);
    CHECK(v.lin);
    REQUIRE(v.certificate.has_value());
    CHECK(v.certificate->m == std::vector<Int>{Int(0)});
}

TEST_CASE("local(2:1) + x1/2 on Z(2^inf)+Q[2]: diagonal witness, neither RIN nor LIN") {
    GroupDescriptor g = make_group({pruf(2), loc({2})});
    Endomorphism phi = blockwise(g, {Rat(1), Rat(1, 2)});
    Verdict v = classify_general({phi}, g);
    CHECK(!v.lin);
    check_witnessed(v, phi);
    CHECK(v.witness->kind == WitnessKind::Diagonal);
}

TEST_CASE("D-scalar must match m/n when C/V has an infinite p-component") {
    GroupDescriptor g = make_group({pruf(3), loc({2, 3})});
    // x5 on Z(3^inf), x1/2 on Q[{2,3}]: C/V has infinite 3-component, 5 != 1/2.
    Endomorphism bad = blockwise(g, {Rat(5), Rat(1, 2)});
    Verdict vb = classify_general({bad}, g);
    check_witnessed(vb, bad);
    // x1/2 on both parts is inertial.
    Endomorphism good = blockwise(g, {Rat(1, 2), Rat(1, 2)});
    Verdict vg = classify_general({good}, g);
    check_inertial(vg, {good}, g);
    REQUIRE(vg.certificate->kind == InertialCertificate::Kind::CaseB);
    CHECK(vg.certificate->pi == PrimeSet({Int(2)}));
}

TEST_CASE("infinite free rank pins torsion scalars to the integer") {
    GroupDescriptor g = make_group({cyc(3, 2, Multiplicity::w()), free_slot(Multiplicity::w())});
    // x2 on both parts: integer, congruent everywhere.
    Endomorphism good = blockwise(g, {Rat(2), Rat(2)});
    check_inertial(classify_general({good}, g), {good}, g);
    // x5 on the tower vs x2 on the free part: 5 != 2 mod 9.
    Endomorphism bad = blockwise(g, {Rat(5), Rat(2)});
    check_witnessed(classify_general({bad}, g), bad);
    // x11 on the tower vs x2 on the free part: 11 = 2 mod 9.
    Endomorphism ok = blockwise(g, {Rat(11), Rat(2)});
    check_inertial(classify_general({ok}, g), {ok}, g);
}

TEST_CASE("finitary parts are absorbed into the index bound") {
    GroupDescriptor g = make_group({cyc(2, 2, Multiplicity::finite(1)), cyc(3, 1, Multiplicity::w())});
    Endomorphism phi = multiplication(g, Rat(1));
    FinitaryContribution f;
    f.weights[{1, 0}] = Rat(1);
    f.modulus = 3;
    f.target = unit_element(g, {1, 0});
    phi.finitary.contributions.push_back(std::move(f));
    REQUIRE(is_well_defined(phi).ok);
    Verdict v = classify_general({phi}, g);
    check_inertial(v, {phi}, g);
    CHECK(v.certificate->index_bound % 3 == 0);
}

TEST_CASE("off-diagonal map into a quasi-cyclic component is not inertial") {
    GroupDescriptor g = make_group({pruf(2), pruf(2)});
    Endomorphism phi = zero_endo(g);
    phi.matrix.entries[{CoordKey{0, 0}, CoordKey{1, 0}}] = Rat(1);
    REQUIRE(is_well_defined(phi).ok);
    Verdict v = classify_general({phi}, g);
    check_witnessed(v, phi);
}

TEST_CASE("family verdict is the conjunction of the members") {
    GroupDescriptor g = make_group({pruf(3), loc({2, 3})});
    Endomorphism a = multiplication(g, Rat(2));
    Endomorphism b = blockwise(g, {Rat(1, 2), Rat(1, 2)});
    Endomorphism c = blockwise(g, {Rat(5), Rat(1, 3)});  // unbounded A_3 with 3 | n: not RIN
    std::vector<std::vector<Endomorphism>> families = {{a}, {b}, {a, b}, {a, c}, {a, b, c}};
    for (const auto& fam : families) {
        Verdict whole = classify_general(fam, g);
        bool all_rin = true, all_lin = true;
        for (const auto& phi : fam) {
            Verdict one = classify_general({phi}, g);
            all_rin = all_rin && one.rin;
            all_lin = all_lin && one.lin;
        }
        CHECK(whole.rin == all_rin);
        CHECK(whole.lin == all_lin);
        if (whole.rin) CHECK(validate_certificate(*whole.certificate, fam, g).empty());
    }
}

TEST_CASE("closure: sums and compositions of certified-inertial endomorphisms") {
    GroupDescriptor g = make_group({pruf(3), loc({2})});
    std::vector<Endomorphism> pool = {
        multiplication(g, Rat(1)), multiplication(g, Rat(2)),
        blockwise(g, {Rat(1, 2), Rat(1, 2)}), blockwise(g, {Rat(5), Rat(2)})};
    for (const auto& phi : pool) REQUIRE(classify_general({phi}, g).rin);
    for (const auto& phi : pool)
        for (const auto& psi : pool) {
            CHECK(classify_general({add(phi, psi)}, g).rin);
            CHECK(classify_general({compose(phi, psi)}, g).rin);
        }
}

TEST_CASE("LIN implies RIN at finite torsion-free rank") {
    std::vector<GroupDescriptor> groups = {
        make_group({free_slot(Multiplicity::finite(2))}),
        make_group({loc({2}), free_slot(Multiplicity::finite(1))}),
        make_group({pruf(2), free_slot(Multiplicity::finite(1))}),
        make_group({cyc(2, 2, Multiplicity::w()), loc({3})}),
        make_group({pruf(5), loc({2, 5})})};
    std::vector<Rat> scalars = {Rat(0), Rat(1), Rat(-1), Rat(2), Rat(1, 2), Rat(3, 2), Rat(-5)};
    for (const auto& g : groups)
        for (const auto& r : scalars) {
            Verdict v;
            try {
                v = classify_multiplication(Scalar(r), g);
            } catch (const std::invalid_argument&) {
                continue;  // scalar not well-defined on this group
            }
            if (v.lin) CHECK(v.rin);
        }
}

TEST_CASE("closed-form multiplication rules agree with the general engine") {
    std::vector<GroupDescriptor> groups = {
        make_group({loc_all(Multiplicity::w())}),
        make_group({cyc(3, 1, Multiplicity::w())}),
        make_group({pruf(2), loc({3})}),
        make_group({pruf(3), cyc(2, 1, Multiplicity::w()), loc({2, 3})})};
    std::vector<Rat> scalars = {Rat(0), Rat(1), Rat(2), Rat(-3), Rat(1, 2), Rat(5, 3)};
    for (const auto& g : groups)
        for (const auto& r : scalars) {
            Verdict v;
            try {
                v = classify_multiplication(Scalar(r), g);
            } catch (const std::invalid_argument&) {
                continue;
            }
            Verdict e = classify_general({multiplication(g, r)}, g);
            CHECK(v.rin == e.rin);
            CHECK(v.lin == e.lin);
        }
}

TEST_CASE("certificate validator rejects corrupted certificates") {
    GroupDescriptor g = make_group({pruf(3), loc({2})});
    Endomorphism phi = blockwise(g, {Rat(1, 2), Rat(1, 2)});
    Verdict v = classify_general({phi}, g);
    REQUIRE(v.certificate.has_value());
    REQUIRE(v.certificate->kind == InertialCertificate::Kind::CaseB);

    InertialCertificate wrong_scalar = *v.certificate;
    wrong_scalar.scalars[0].on_c.begin()->second += 1;
    CHECK(!validate_certificate(wrong_scalar, {phi}, g).empty());

    InertialCertificate wrong_pi = *v.certificate;
    wrong_pi.pi = PrimeSet({Int(5)});
    CHECK(!validate_certificate(wrong_pi, {phi}, g).empty());

    GroupDescriptor zg = make_group({free_slot(Multiplicity::finite(1))});
    Endomorphism mu = multiplication(zg, Rat(3));
    Verdict vz = classify_general({mu}, zg);
    REQUIRE(vz.certificate->kind == InertialCertificate::Kind::CaseA);
    InertialCertificate wrong_m = *vz.certificate;
    wrong_m.m[0] = 4;
    CHECK(!validate_certificate(wrong_m, {mu}, zg).empty());
}

// ---------------------------------------------------------------------------
// common_V
// ---------------------------------------------------------------------------

TEST_CASE("common_V on Q[2] with x1/2 is the whole group") {
    GroupDescriptor g = make_group({loc({2})});
    SubgroupHandle v = common_V({multiplication(g, Rat(1, 2))}, g);
    REQUIRE(v.generators.size() == 1);
    CHECK(v.generators[0] == unit_element(g, {0, 0}));
    CHECK(v.divisibleClosure.at(0) == PrimeSet({Int(2)}));
}

TEST_CASE("common_V on Z with x3 is Z itself") {
    GroupDescriptor g = make_group({free_slot(Multiplicity::finite(1))});
    SubgroupHandle v = common_V({multiplication(g, Rat(3))}, g);
    REQUIRE(v.generators.size() == 1);
    CHECK(v.generators[0] == unit_element(g, {0, 0}));
    CHECK(v.divisibleClosure.empty());
}

TEST_CASE("common_V on Z(3^inf)+Q[2] picks the free line") {
    GroupDescriptor g = make_group({pruf(3), loc({2})});
    Endomorphism phi = blockwise(g, {Rat(2), Rat(1, 2)});
    SubgroupHandle v = common_V({phi}, g);
    REQUIRE(v.generators.size() == 1);
    CHECK(v.generators[0] == unit_element(g, {1, 0}));
    CHECK(v.divisibleClosure.at(1) == PrimeSet({Int(2)}));
}

TEST_CASE("common_V diagnostics") {
    GroupDescriptor gw = make_group({free_slot(Multiplicity::w())});
    CHECK_THROWS_AS(common_V({multiplication(gw, Rat(1))}, gw), std::invalid_argument);
    GroupDescriptor g = make_group({free_slot(Multiplicity::finite(2))});
    Endomorphism shear = zero_endo(g);
    shear.blocks.push_back({{0}, Scalar(Rat(1))});
    shear.matrix.entries[{CoordKey{0, 1}, CoordKey{0, 0}}] = Rat(1);
    CHECK_THROWS_AS(common_V({shear}, g), std::domain_error);
}

// ---------------------------------------------------------------------------
// convert_mf_fm
// ---------------------------------------------------------------------------

TEST_CASE("finitary deviation converts to the FM form with a small image") {
    GroupDescriptor g = make_group({cyc(2, 2, Multiplicity::finite(1)), cyc(3, 1, Multiplicity::w())});
    Endomorphism phi = multiplication(g, Rat(1));
    FinitaryContribution f;
    f.weights[{0, 0}] = Rat(1);
    f.modulus = 2;
    f.target = elem_scale(g, Rat(2), unit_element(g, {0, 0}));
    phi.finitary.contributions.push_back(std::move(f));
    REQUIRE(is_well_defined(phi).ok);

    MfFmDecomposition d = convert_mf_fm(phi, MfFmDirection::MfToFm);
    CHECK(d.mult.is_multiplication());
    REQUIRE(d.image_size.kind == SectionSize::Finite);
    CHECK(d.image_size.n <= 2);
    CHECK(d.index_bound % 2 == 0);
    // Round trip: mult + finite_part is phi modulo the finitary ideal.
    auto [eq, sz] = equal_mod_finitary(add(d.mult, d.finite_part), phi);
    CHECK(eq);
}

TEST_CASE("a plain multiplication has trivial FM part") {
    GroupDescriptor g = make_group({cyc(5, 1, Multiplicity::w())});
    MfFmDecomposition d = convert_mf_fm(multiplication(g, Rat(2)), MfFmDirection::FmToMf);
    CHECK(d.image_size == SectionSize::finite(1));
    CHECK(d.index_bound == 1);
}

TEST_CASE("convert_mf_fm diagnostics") {
    GroupDescriptor gz = make_group({free_slot(Multiplicity::finite(1))});
    CHECK_THROWS_AS(convert_mf_fm(multiplication(gz, Rat(1)), MfFmDirection::MfToFm),
                    std::invalid_argument);
    // Off-diagonal quasi-cyclic map: infinite deviation, neither form.
    GroupDescriptor g = make_group({pruf(2), pruf(2)});
    Endomorphism phi = zero_endo(g);
    phi.matrix.entries[{CoordKey{0, 0}, CoordKey{1, 0}}] = Rat(1);
    CHECK_THROWS_AS(convert_mf_fm(phi, MfFmDirection::MfToFm), std::domain_error);
}

// ---------------------------------------------------------------------------
// lift_finite_index
// ---------------------------------------------------------------------------

TEST_CASE("verdicts lift across finite index with the bound adjusted") {
    GroupDescriptor g = make_group({free_slot(Multiplicity::finite(1))});
    Verdict v = classify_general({multiplication(g, Rat(3))}, g);
    Verdict lifted = lift_finite_index(v, Int(2));
    CHECK(lifted.rin == v.rin);
    CHECK(lifted.lin == v.lin);
    CHECK(lifted.certificate->index_bound == v.certificate->index_bound * 2);
    CHECK_THROWS_AS(lift_finite_index(v, Int(0)), std::invalid_argument);
    CHECK_THROWS_AS(lift_finite_index(v, Int(-1)), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// commutator_check
// ---------------------------------------------------------------------------

TEST_CASE("multiplications commute exactly") {
    GroupDescriptor g = make_group({cyc(3, 1, Multiplicity::w())});
    auto [ok, size] = commutator_check(multiplication(g, Rat(2)), multiplication(g, Rat(5)));
    CHECK(ok);
    CHECK(size == SectionSize::finite(1));
}

TEST_CASE("finitary parts commute modulo a finite image") {
    GroupDescriptor g = make_group({cyc(2, 2, Multiplicity::finite(1)), cyc(3, 1, Multiplicity::w())});
    Endomorphism phi = multiplication(g, Rat(1));
    FinitaryContribution f;
    f.weights[{0, 0}] = Rat(1);
    f.modulus = 2;
    f.target = elem_scale(g, Rat(2), unit_element(g, {0, 0}));
    phi.finitary.contributions.push_back(std::move(f));
    auto [ok, size] = commutator_check(phi, multiplication(g, Rat(2)));
    CHECK(ok);
    CHECK(size.kind == SectionSize::Finite);
}

TEST_CASE("commutator_check rejects non-inertial inputs") {
    GroupDescriptor g = make_group({free_slot(Multiplicity::finite(2))});
    Endomorphism shear = zero_endo(g);
    shear.blocks.push_back({{0}, Scalar(Rat(1))});
    shear.matrix.entries[{CoordKey{0, 1}, CoordKey{0, 0}}] = Rat(1);
    CHECK_THROWS_AS(commutator_check(shear, multiplication(g, Rat(1))),
                    std::invalid_argument);
}

// ---------------------------------------------------------------------------
// automorphism_bridge
// ---------------------------------------------------------------------------

TEST_CASE("x2 on Q^omega: RIN/LIN swap under inversion") {
    GroupDescriptor g = make_group({loc_all(Multiplicity::w())});
    AutomorphismBridge b = automorphism_bridge(multiplication(g, Rat(2)), g);
    CHECK(b.rin);
    CHECK(!b.lin);
    CHECK(!b.rin_inv);
    CHECK(b.lin_inv);
}

TEST_CASE("x2/3 on Q: all four properties hold at rank one") {
    GroupDescriptor g = make_group({loc_all(Multiplicity::finite(1))});
    AutomorphismBridge b = automorphism_bridge(multiplication(g, Rat(2, 3)), g);
    CHECK(b.rin);
    CHECK(b.lin);
    CHECK(b.rin_inv);
    CHECK(b.lin_inv);
}

TEST_CASE("identity bridges trivially; non-invertible inputs are rejected") {
    GroupDescriptor g = make_group({pruf(3), loc({2})});
    AutomorphismBridge b = automorphism_bridge(multiplication(g, Rat(1)), g);
    CHECK((b.rin && b.lin && b.rin_inv && b.lin_inv));
    GroupDescriptor z = make_group({free_slot(Multiplicity::finite(1))});
    CHECK_THROWS_AS(automorphism_bridge(multiplication(z, Rat(0)), z), std::domain_error);
}
