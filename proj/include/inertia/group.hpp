#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "inertia/matrix.hpp"
#include "inertia/numeric.hpp"

namespace inertia {

// ---------------------------------------------------------------------------
// Atoms and descriptors
// ---------------------------------------------------------------------------

enum class AtomKind { Cyclic, Prufer, Localized };

// Cyclic(p,e) = Z(p^e); Prufer(p) = Z(p^inf); Localized(pi) = rationals with
// pi-supported denominators (pi empty: the integers, pi = ALL: the rationals).
struct Atom {
    AtomKind kind{};
    Int p;        // Cyclic, Prufer
    long e = 0;   // Cyclic
    PrimeSet pi;  // Localized

    static Atom cyclic(Int p, long e);
    static Atom prufer(Int p);
    static Atom localized(PrimeSet pi);

    bool is_torsion() const { return kind != AtomKind::Localized; }
    bool is_finite() const { return kind == AtomKind::Cyclic; }
    Int order() const;  // Cyclic only

    bool operator==(const Atom&) const = default;
    auto operator<=>(const Atom&) const = default;
    std::string str() const;
};

struct Multiplicity {
    bool omega = false;
    long count = 1;  // meaningful when !omega

    static Multiplicity finite(long n) { return {false, n}; }
    static Multiplicity w() { return {true, 0}; }
    bool operator==(const Multiplicity&) const = default;
};

struct Slot {
    Atom atom;
    Multiplicity mult;
    bool operator==(const Slot&) const = default;
};

// Canonical-form bookkeeping for groups given by a finite presentation:
// relation matrix R over n generators, normalized via Smith form U R V = D.
// Canonical coordinates are CRT components of the y = xV coordinates.
struct FgData {
    Mat relations;
    Mat v, vinv;
    // For each canonical coordinate (in slot/copy enumeration order): which
    // y-column it lives on and its CRT modulus (0 for a free column).
    struct CanonCoord {
        std::size_t ycol;
        Int modulus;  // p^e, or 0 for a free coordinate
        Int full_modulus;  // the d_i of that y-column (0 for free)
    };
    std::vector<CanonCoord> coords;
};

struct GroupDescriptor {
    std::vector<Slot> slots;
    std::shared_ptr<const FgData> fg;  // non-null for presented groups

    static GroupDescriptor from_slots(std::vector<Slot> s) {
        GroupDescriptor g;
        g.slots = std::move(s);
        return g;
    }
    // Normalizes once; all later operations run on the canonical slots.
    static GroupDescriptor from_presentation(const Mat& relations);

    bool trivial() const { return slots.empty(); }
    // Torsion-free rank as a multiplicity (finite value or omega).
    Multiplicity r0() const;
    std::set<Int> torsion_primes() const;
    // Smallest n with n*T(A) = 0, if the torsion part is bounded.
    std::optional<Int> exponent_bound() const;
    // Min condition: finitely many copies of finitely many Prufer atoms plus
    // a finite group; no Localized slots.
    bool has_min() const;
    bool is_periodic() const;
    bool is_torsion_free() const;
    bool is_finite() const;

    bool operator==(const GroupDescriptor& o) const { return slots == o.slots; }
    std::string str() const;
};

// ---------------------------------------------------------------------------
// Elements
// ---------------------------------------------------------------------------

struct CoordKey {
    std::size_t slot;
    long copy;
    auto operator<=>(const CoordKey&) const = default;
};

// Finite-support coordinate map. Coordinate values are canonical rationals:
// Cyclic(p,e): integer in [0, p^e); Prufer(p): a/p^i in [0,1) with p ∤ a;
// Localized(pi): reduced rational with pi-supported denominator.
struct Element {
    std::map<CoordKey, Rat> coords;

    bool is_zero() const { return coords.empty(); }
    Rat at(CoordKey k) const {
        auto it = coords.find(k);
        return it == coords.end() ? Rat(0) : it->second;
    }
    bool operator==(const Element&) const = default;
    auto operator<=>(const Element&) const = default;
};

// Throws std::domain_error if a value cannot be canonicalized in its atom
// (e.g. denominator 2 on an integer slot).
Rat canonical_coord(const Atom& atom, const Rat& v);
Element canonicalize(const GroupDescriptor& g, Element e);
Element elem_add(const GroupDescriptor& g, const Element& a, const Element& b);
Element elem_neg(const GroupDescriptor& g, const Element& a);
Element elem_scale(const GroupDescriptor& g, const Rat& r, const Element& a);
Element unit_element(const GroupDescriptor& g, CoordKey c);

// Order of an element (nullopt for infinite order).
std::optional<Int> elem_order(const GroupDescriptor& g, const Element& a);

// Canonical coordinates of sum(x_j * generator_j) in a presented group.
Element elem_from_generators(const GroupDescriptor& g, const std::vector<Int>& x);

// ---------------------------------------------------------------------------
// Subgroup handles and section sizes
// ---------------------------------------------------------------------------

// X = sum over generators g of Z[1/pi(g)] * g, where pi(g) is the union of
// the closure prime sets of the flagged slots meeting g's support. Closure
// flags are only meaningful on Prufer slots ({p}) and Localized slots (a
// subset of the slot's prime set).
struct SubgroupHandle {
    std::vector<Element> generators;
    std::map<std::size_t, PrimeSet> divisibleClosure;
    std::string label;
};

SubgroupHandle trivial_subgroup(std::string label = "0");

struct SectionSize {
    enum Kind { Finite, AtLeast, CertifiedInfinite } kind = Finite;
    Int n = 1;           // Finite value or AtLeast bound
    std::string growth;  // CertifiedInfinite: closed-form description

    static SectionSize finite(Int v) { return {Finite, std::move(v), ""}; }
    static SectionSize at_least(Int v) { return {AtLeast, std::move(v), ""}; }
    static SectionSize infinite(std::string why) {
        return {CertifiedInfinite, 0, std::move(why)};
    }
    bool is_finite() const { return kind == Finite; }
    bool operator==(const SectionSize&) const = default;
    std::string str() const;
};

inline constexpr long kDefaultPrecision = 20;
inline const Int kDefaultThreshold = 10000;

// |(X+Y)/X|, computed exactly under truncation with stabilization detection.
SectionSize section_order(const GroupDescriptor& g, const SubgroupHandle& x,
                          const SubgroupHandle& y, long precision = kDefaultPrecision,
                          const Int& threshold = kDefaultThreshold);

// Exact torsion-free rank of (X+Y)/X (no truncation involved in the free
// directions). Positive rank certifies an infinite section.
long section_rank_growth(const GroupDescriptor& g, const SubgroupHandle& x,
                         const SubgroupHandle& y);

struct CommensurabilityResult {
    bool commensurable;
    SectionSize y_over_meet;  // |Y/(X∩Y)|
    SectionSize x_over_meet;  // |X/(X∩Y)|
};

CommensurabilityResult is_commensurable(const GroupDescriptor& g, const SubgroupHandle& x,
                                        const SubgroupHandle& y,
                                        long precision = kDefaultPrecision,
                                        const Int& threshold = kDefaultThreshold);

// Membership a ∈ X, decided at truncation level `precision`.
bool subgroup_contains(const GroupDescriptor& g, const SubgroupHandle& x, const Element& a,
                       long precision = kDefaultPrecision);

// ---------------------------------------------------------------------------
// Canonical subgroup operations (descriptor level)
// ---------------------------------------------------------------------------

GroupDescriptor torsion_part(const GroupDescriptor& a);
GroupDescriptor component(const GroupDescriptor& a, const PrimeSet& pi);
GroupDescriptor n_socle(const GroupDescriptor& a, const Int& n);
GroupDescriptor divisible_part(const GroupDescriptor& a);

}  // namespace inertia
