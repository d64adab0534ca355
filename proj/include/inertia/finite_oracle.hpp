#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include "inertia/endo.hpp"

namespace inertia {

// Exhaustive ground truth on finite abelian groups. Everything here is
// independent of the section/classifier machinery: elements are coordinate
// tuples, subgroups are generator matrices (or element bitmasks at desk
// scale), and all answers come from enumeration, never from formulas.

struct FiniteAbelianGroup {
    GroupDescriptor g;             // finite, all Cyclic slots
    std::vector<CoordKey> coords;  // flattened coordinates, fixed order
    std::vector<Int> moduli;       // prime-power order per coordinate

    static FiniteAbelianGroup from_descriptor(const GroupDescriptor& g);
    // Convenience: orders must be prime powers, e.g. {4, 2, 9}.
    static FiniteAbelianGroup from_orders(const std::vector<Int>& orders);

    Int order() const;
    std::size_t dim() const { return moduli.size(); }
    // The unique prime when this is a p-group.
    std::optional<Int> p_group_prime() const;
};

// A subgroup in oracle representation: generator rows (coordinates against
// the group's flat basis) plus, at desk scale, an element membership mask.
struct OracleSubgroup {
    std::vector<std::vector<Int>> gens;
    Int order = 1;
    std::vector<std::uint64_t> mask;  // bit per element index; may be empty

    bool contains(std::size_t element_index) const {
        return !mask.empty() && (mask[element_index >> 6] >> (element_index & 63)) & 1;
    }
};

struct SubgroupTable {
    FiniteAbelianGroup group;
    std::vector<OracleSubgroup> subgroups;
};

inline constexpr long long kOracleOrderCap = 1 << 14;
inline constexpr std::size_t kOracleCountCap = 2'000'000;

// Complete duplicate-free subgroup list. Enumerates twice with independent
// algorithms (canonical Hermite-basis DFS, then breadth-first closure of
// generator sets) and throws std::runtime_error when the two disagree or a
// cap is exceeded.
SubgroupTable enumerate_subgroups(const FiniteAbelianGroup& G,
                                  Int order_cap = Int(kOracleOrderCap),
                                  std::size_t count_cap = kOracleCountCap);

// Streaming enumeration: invokes the visitor once per subgroup without
// materializing a table. Visitor receives generator rows and the order.
void for_each_subgroup(const FiniteAbelianGroup& G,
                       const std::function<void(const std::vector<std::vector<Int>>&, const Int&)>& visit);

std::size_t count_subgroups(const FiniteAbelianGroup& G);

// An endomorphism of G as an integer matrix: row i = image of the i-th
// coordinate unit vector. Well-definedness (order divisibility) is checked.
Mat endo_to_matrix(const FiniteAbelianGroup& G, const Endomorphism& phi);
bool matrix_well_defined(const FiniteAbelianGroup& G, const Mat& m);
// Uniform random well-defined matrix: entry (i,j) is a multiple of
// p^{max(0, e_j - e_i)} on each primary component.
Mat random_endo_matrix(const FiniteAbelianGroup& G, std::mt19937& rng);

// Smallest Phi-invariant subgroup containing X.
OracleSubgroup phi_closure_up(const FiniteAbelianGroup& G,
                              const std::vector<std::vector<Int>>& gens,
                              const std::vector<Mat>& phis);
// Largest Phi-invariant subgroup inside X (mask-based; desk scale only).
OracleSubgroup phi_closure_down(const FiniteAbelianGroup& G,
                                const std::vector<std::vector<Int>>& gens,
                                const std::vector<Mat>& phis);

OracleSubgroup subgroup_from_generators(const FiniteAbelianGroup& G,
                                        const std::vector<std::vector<Int>>& gens);

struct ClosureBoundResult {
    long m = 0;      // max over X of log_p |X / X_phi|
    long worst = 0;  // max over X of log_p |X^phi / X|
    bool holds = false;
};

// Exhaustive verification of the p^{m^2} closure bound on a p-group; the
// batch form enumerates the subgroup lattice once for all endomorphisms.
ClosureBoundResult check_closure_bound(const FiniteAbelianGroup& G, const Mat& phi);
std::vector<ClosureBoundResult> check_closure_bound_batch(const FiniteAbelianGroup& G,
                                                          const std::vector<Mat>& phis);

// Exact max over all subgroups X of |X^Phi / X_Phi| (streaming).
Int fs_bound(const FiniteAbelianGroup& G, const std::vector<Mat>& phis);

// The adjoint endomorphism under the canonical self-duality of G; satisfies
// ann(X)^{adj} = ann(X_phi), which turns down-closures into up-closures.
Mat adjoint_matrix(const FiniteAbelianGroup& G, const Mat& phi);
// Annihilator subgroup of X under the pairing <x,y> = sum x_i y_i E/m_i mod E.
OracleSubgroup annihilator(const FiniteAbelianGroup& G,
                           const std::vector<std::vector<Int>>& gens);

// ---------------------------------------------------------------------------
// Cyclic phi-modules on arbitrary (desk-scale) ambients
// ---------------------------------------------------------------------------

enum class CyclicModuleStatus { Finite, InfiniteFG, CapExceeded };

struct CyclicModule {
    SubgroupHandle handle;  // <a>^(phi) as a subgroup handle of the ambient
    CyclicModuleStatus status = CyclicModuleStatus::Finite;
    std::optional<Int> order;          // set when status == Finite
    std::optional<Int> torsion_order;  // torsion part of the module, when split
};

CyclicModule cyclic_module(const GroupDescriptor& g, const Element& a,
                           const Endomorphism& phi, int cap = 64);

}  // namespace inertia
