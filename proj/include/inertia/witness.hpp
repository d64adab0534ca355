#pragma once

#include <string>
#include <vector>

#include "inertia/endo.hpp"

namespace inertia {

// Parametric counterexample families certifying that an endomorphism is not
// RIN (|(X+phiX)/X| unbounded over the family) or not LIN (|X/(X ∩ phiX)|
// unbounded). A witness records a closed-form generator schema in the index
// i together with a claimed lower-bound growth function; verification
// recomputes the section orders independently for every i up to a precision
// K. The artifact certifies the verified prefix plus the closed form, not a
// formal proof of unboundedness.

enum class WitnessMode { RIN, LIN };
enum class WitnessKind { Diagonal, FreeRank, Independence, PrimaryLin };

inline constexpr long kDefaultWitnessK = 20;

struct NonInertialWitness {
    WitnessKind kind{};
    WitnessMode mode{};
    GroupDescriptor ambient;
    long verified_to = 0;

    // Diagonal: chain H_i = <(1/p^{i-1}, 1/p^{i-1})> across a Prufer(p) slot
    // and a Localized(pi) slot with p in pi.
    Int p = 0;
    Scalar alpha;
    Rat mn;  // Diagonal and FreeRank scalar m/n
    std::size_t prufer_slot = 0;
    std::size_t local_slot = 0;

    // FreeRank: X_i = <e_0, ..., e_{i-1}> on an omega-multiplicity free slot.
    std::size_t slot = 0;

    // Independence: constant family X = <generator>.
    Element generator;

    // PrimaryLin: cyclic components cycled over the bad slots; component j
    // uses copy start_copy + j/size of lin_slots[j % size].
    struct LinComponent {
        std::size_t slot;
        long start_copy;
        Int order_factor;  // section factor contributed per copy
    };
    std::vector<LinComponent> lin_slots;

    // Generalized chain schema backing the Diagonal kind. Generator j of
    // family(i), for j in [chain_start, chain_start + i), is the sum over
    // terms of coeff * e_{slot, copy_base + copy_step * j}, where coeff is
    // p^-j (divide), p^-fixed_exp (fixed_exp > 0), or 1. Claimed growth is
    // chain_factor^i.
    struct ChainTerm {
        std::size_t slot;
        long copy_base = 0;
        long copy_step = 0;
        bool divide = false;
        long fixed_exp = 0;
    };
    std::vector<ChainTerm> chain;
    long chain_start = 0;
    Int chain_factor = 0;

    SubgroupHandle family(long i) const;
    // Claimed lower bound on the section order at index i (1 for
    // Independence, whose certificate is a positive torsion-free rank).
    Int growth(long i) const;
    std::string growth_expr() const;
};

// Constructors throw std::invalid_argument when the preconditions fail --
// including on the parameter sets that are provably inertial (e.g. a
// diagonal request with alpha = m/n). Every constructor self-verifies its
// output to index K before returning.

// Non-inertiality of alpha ⊕ m/n on Z(p^inf) ⊕ Q^pi with p | n, p ∤ m.
NonInertialWitness diagonal_witness(const GroupDescriptor& g, const Int& p,
                                    const Scalar& alpha, const Rat& mn,
                                    long K = kDefaultWitnessK);

// Multiplication m/n with n != ±1 on a group with infinite free rank.
NonInertialWitness free_rank_witness(const GroupDescriptor& g, const Rat& mn,
                                     long K = kDefaultWitnessK);

// Torsion-free ambient: a generator a with phi(a) rationally independent of
// a yields a constant family with a rank-certified infinite section.
NonInertialWitness independence_witness(const GroupDescriptor& g, const Endomorphism& phi,
                                        long K = kDefaultWitnessK);

// Periodic ambient: infinitely many cyclic components on which phi is not an
// invertible multiplication give an unbounded LIN section.
NonInertialWitness primary_lin_witness(const Endomorphism& phi, long K = kDefaultWitnessK);

// General section chain: explicit generator schema (see ChainTerm). Used for
// scalar-mismatch witnesses that do not fit the canonical constructors: pairs
// of quasi-cyclic components with distinct scalars, unbounded cyclic towers
// against divisible or free partners, and deviations from the scalar carried
// by the torsion-free part. Self-verifies against phi to index K.
NonInertialWitness section_chain_witness(const GroupDescriptor& g, const Int& p,
                                         std::vector<NonInertialWitness::ChainTerm> chain,
                                         long chain_start, const Int& chain_factor,
                                         const Endomorphism& phi,
                                         long K = kDefaultWitnessK);

struct WitnessCheck {
    bool ok = true;
    long first_bad = -1;  // first failing index when !ok
};

// Independent re-verification: recomputes every section through group-core's
// truncated section counting (section_order / is_commensurable /
// section_rank_growth) and compares against growth(i) for i <= K. Shares no
// code with the constructors' closed-form bookkeeping.
WitnessCheck verify_witness(const NonInertialWitness& w, const Endomorphism& phi,
                            long K = kDefaultWitnessK);

}  // namespace inertia
