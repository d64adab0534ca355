#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "inertia/endo.hpp"
#include "inertia/group.hpp"
#include "inertia/witness.hpp"

namespace inertia {

// ---------------------------------------------------------------------------
// Certificates and verdicts
// ---------------------------------------------------------------------------

// Positive evidence that a family of endomorphisms is inertial. CaseA: each
// endomorphism acts as multiplication by an integer m_i on a finite-index
// subgroup A0. CaseB: a finite-index A0 = B ⊕ D ⊕ C with prime sets
// π ⊆ π₁ such that (i) B ⊕ D is the π₁-component of A0, B bounded, D
// divisible with finite rank and support disjoint from π; (ii) C carries a
// submodule V isomorphic to finitely many copies of Q^π with C/V a
// π₁-divisible π'-group; (iii) each endomorphism is a multiplication on B,
// D, V, and C/V; (iv) it equals m_i/n_i on V and on every p-component of D
// with infinite p-component of C/V, where π = π(n₁⋯n_t).
struct InertialCertificate {
    enum class Kind { CaseA, CaseB } kind = Kind::CaseA;

    // Shared: index bound for |A/A0| (product of the dropped finite slots).
    Int index_bound = 1;
    std::string a0_description;

    // CaseA: one integer per endomorphism.
    std::vector<Int> m;

    // CaseB.
    PrimeSet pi, pi1;
    std::vector<std::size_t> b_slots, d_slots, c_slots;
    SubgroupHandle v;
    long rank_v = 0;
    struct EndoScalars {
        Rat mn;                           // the fraction m_i/n_i
        Rat on_v;                         // scalar on V (= mn)
        std::map<std::size_t, Rat> on_b;  // per B slot
        std::map<std::size_t, Rat> on_d;  // per D slot
        std::map<std::size_t, Rat> on_c;  // per C slot (action on C/V)
    };
    std::vector<EndoScalars> scalars;  // one per endomorphism
};

struct Verdict {
    bool rin = false;
    bool lin = false;
    std::optional<InertialCertificate> certificate;  // present when rin
    std::optional<NonInertialWitness> witness;       // present when !rin
};

// Independent re-validation of an emitted certificate against the family it
// certifies: CaseA via image-finiteness of φ_i − m_i, CaseB by checking the
// conditions (i)–(iv) directly on slots and generators. Returns an empty
// string on success, else a diagnostic naming the violated condition.
std::string validate_certificate(const InertialCertificate& cert,
                                 const std::vector<Endomorphism>& phis,
                                 const GroupDescriptor& a);

// ---------------------------------------------------------------------------
// Decision procedures
// ---------------------------------------------------------------------------

// Multiplication by a scalar (componentwise p-adic meaning on periodic
// groups, rational meaning otherwise). Decided by the closed-form rules:
// RIN iff the group has finite torsion-free rank or the scalar is an
// integer; LIN per torsion-free rank (invertible-or-Min on p-groups, Min of
// the numerator component when 0 < r0 < ∞, |m| = 1 when r0 is infinite).
Verdict classify_multiplication(const Scalar& s, const GroupDescriptor& a);

// Torsion-free ambient: inertial endomorphisms are exactly multiplications
// m/n with n = ±1 or finite torsion-free rank.
Verdict classify_torsion_free(const Endomorphism& phi, const GroupDescriptor& a);

// Periodic ambient; the family verdict is the conjunction over the family.
Verdict classify_periodic(const std::vector<Endomorphism>& phis, const GroupDescriptor& a);

// Full decision procedure for a finite family on any supported group.
// Emits a re-validated certificate on success and a verified witness (for
// the first failing endomorphism) otherwise.
Verdict classify_general(const std::vector<Endomorphism>& phis, const GroupDescriptor& a);

// ---------------------------------------------------------------------------
// Supporting operations
// ---------------------------------------------------------------------------

// Common invariant submodule V ≅ ⊕_r Q^π for a family on a group of finite
// torsion-free rank: spanned by the free-slot units, with closure π(∏n_i).
// Throws std::domain_error with diagnostics when no structural V exists.
SubgroupHandle common_V(const std::vector<Endomorphism>& phis, const GroupDescriptor& a);

// Conversion between "multiplication on a finite-index subgroup" (MF) and
// "multiplication modulo a finite subgroup A1 = im(φ − α)" (FM) on periodic
// ambients. Both representations are verified.
enum class MfFmDirection { MfToFm, FmToMf };
struct MfFmDecomposition {
    Endomorphism mult;         // the blockwise multiplication part
    Endomorphism finite_part;  // φ − mult; finite image (FM form)
    SectionSize image_size;    // |A1|
    Int index_bound = 1;       // |A/A0| bound (MF form)
};
MfFmDecomposition convert_mf_fm(const Endomorphism& phi, MfFmDirection direction);

// Inertia passes between A and finite-index subgroups / quotients by finite
// subgroups; the verdict is promoted unchanged with the certificate index
// adjusted. Throws std::invalid_argument unless 0 < index < ∞.
Verdict lift_finite_index(const Verdict& v, const Int& index);

// Corollary-level check that two certified-inertial endomorphisms commute
// modulo the finitary ideal: image of φψ − ψφ must be finite.
std::pair<bool, SectionSize> commutator_check(const Endomorphism& phi, const Endomorphism& psi);

// For an invertible endomorphism: RIN/LIN of φ and of φ⁻¹, with the
// automorphism contracts (rin(φ) ⇔ lin(φ⁻¹); equivalence at finite rank)
// checked. Throws std::domain_error when φ has no structural inverse.
struct AutomorphismBridge {
    bool rin = false, lin = false, rin_inv = false, lin_inv = false;
};
AutomorphismBridge automorphism_bridge(const Endomorphism& phi, const GroupDescriptor& a);

}  // namespace inertia
