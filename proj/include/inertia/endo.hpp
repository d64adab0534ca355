#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "inertia/group.hpp"

namespace inertia {

// Multiplication scalar: a reduced rational, optionally tagged as a p-local
// value (rational p-adic: denominator coprime to p). The tag records intent
// for display/serialization; arithmetic and equality are plain rational.
struct Scalar {
    Rat value;
    std::optional<Int> local_p;

    Scalar() = default;
    Scalar(Rat v) : value(std::move(v)) {}
    Scalar(Rat v, Int p) : value(std::move(v)), local_p(std::move(p)) {}
    bool operator==(const Scalar& o) const { return value == o.value; }
};

struct ScalarBlock {
    std::set<std::size_t> slots;
    Scalar scalar;
};

// e_src -> entry * e_dst (canonicalized in the target atom). Sources and
// targets are copies of finite-multiplicity slots.
struct MatrixPart {
    std::map<std::pair<CoordKey, CoordKey>, Rat> entries;
    bool empty() const { return entries.empty(); }
};

// One summand of a finitary endomorphism:
//   a |-> ((sum_c weights[c] * a_c) mod modulus) * target,
// a homomorphism A -> <target> factoring through a finite quotient. The
// common kernel of the contributions is the finite-index subgroup A0 of the
// type description; cosets are indexed by their residue vectors.
struct FinitaryContribution {
    std::map<CoordKey, Rat> weights;
    Int modulus = 1;
    Element target;
};

struct FinitaryPart {
    std::vector<FinitaryContribution> contributions;
    bool empty() const { return contributions.empty(); }
};

struct Endomorphism {
    GroupDescriptor ambient;
    std::vector<ScalarBlock> blocks;
    MatrixPart matrix;
    FinitaryPart finitary;

    // Scalar acting on a slot; slots not covered by any block carry 0.
    Rat scalar_on(std::size_t slot) const;
    bool is_multiplication() const { return matrix.empty() && finitary.empty(); }
};

// phi = multiplication by r on every slot of g (must be well-defined there).
Endomorphism multiplication(const GroupDescriptor& g, const Rat& r);
Endomorphism zero_endo(const GroupDescriptor& g);

struct WellDefined {
    bool ok = true;
    std::string diagnostic;
    explicit operator bool() const { return ok; }
};

WellDefined is_well_defined(const Endomorphism& phi);

Element apply(const Endomorphism& phi, const Element& a);

Endomorphism add(const Endomorphism& phi, const Endomorphism& psi);
Endomorphism negate(const Endomorphism& phi);
// compose(phi, psi) = phi after psi.
Endomorphism compose(const Endomorphism& phi, const Endomorphism& psi);

SectionSize image_finite(const Endomorphism& phi);

std::pair<bool, SectionSize> equal_mod_finitary(const Endomorphism& phi,
                                                const Endomorphism& psi);

// True iff phi acts as multiplication by r on every coordinate (structural).
bool acts_as_scalar(const Endomorphism& phi, const Rat& r);

// Structural inverse (blocks inverted, matrix block inverted as an exact
// rational matrix); requires an empty finitary part and a verifiable
// two-sided inverse. Throws std::domain_error when not invertible.
Endomorphism invert(const Endomorphism& phi);

// phi restricted to an invariant subgroup A0; supported when phi acts on
// each generator by a scalar (the generators become the slots of the derived
// ambient). Throws std::domain_error on non-invariant or unsupported input.
Endomorphism restrict(const Endomorphism& phi, const SubgroupHandle& a0);

// phi induced on A/V for an invariant V whose generators are single-
// coordinate (r * e_c, possibly with closure flags).
Endomorphism induced_on_quotient(const Endomorphism& phi, const SubgroupHandle& v);

// Finite-index kernel of the finitary part, restricted to its support;
// used for serialization and certificate reporting.
SubgroupHandle finitary_kernel_on_support(const Endomorphism& phi);

}  // namespace inertia
