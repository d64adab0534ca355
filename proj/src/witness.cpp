#include "inertia/witness.hpp"

#include <algorithm>
#include <stdexcept>

namespace inertia {

namespace {

Int abs_int(Int v) { return v < 0 ? -v : v; }

// Largest copy index of slot s touched by the matrix or finitary parts (or
// -1). PrimaryLin components start above it so every family member sees the
// pure scalar action.
long max_touched_copy(const Endomorphism& phi, std::size_t s) {
    long m = -1;
    for (const auto& [key, val] : phi.matrix.entries) {
        if (key.first.slot == s) m = std::max(m, key.first.copy);
        if (key.second.slot == s) m = std::max(m, key.second.copy);
    }
    for (const auto& c : phi.finitary.contributions) {
        for (const auto& [key, w] : c.weights)
            if (key.slot == s) m = std::max(m, key.copy);
        for (const auto& [key, v] : c.target.coords)
            if (key.slot == s) m = std::max(m, key.copy);
    }
    return m;
}

SubgroupHandle image_handle(const Endomorphism& phi, const SubgroupHandle& x) {
    SubgroupHandle out;
    out.label = "phi(" + (x.label.empty() ? std::string("X") : x.label) + ")";
    for (const auto& gen : x.generators) {
        Element img = apply(phi, gen);
        if (!img.is_zero()) out.generators.push_back(std::move(img));
    }
    return out;
}

bool meets_bound(const SectionSize& s, const Int& bound) {
    switch (s.kind) {
        case SectionSize::Finite:
        case SectionSize::AtLeast:
            return s.n >= bound;
        case SectionSize::CertifiedInfinite:
            return true;
    }
    return false;
}

void self_verify(NonInertialWitness& w, const Endomorphism& phi, long K) {
    WitnessCheck c = verify_witness(w, phi, K);
    if (!c.ok)
        throw std::logic_error("witness self-verification failed at index " +
                               std::to_string(c.first_bad));
    w.verified_to = K;
}

}  // namespace

SubgroupHandle NonInertialWitness::family(long i) const {
    if (i < 1) throw std::invalid_argument("witness family index must be >= 1");
    SubgroupHandle h;
    h.label = "X_" + std::to_string(i);
    switch (kind) {
        case WitnessKind::Diagonal: {
            for (long j = chain_start; j < chain_start + i; ++j) {
                Element e;
                for (const auto& t : chain) {
                    long exp = t.divide ? j : t.fixed_exp;
                    Rat coeff = exp > 0 ? Rat(1, pow_int(p, exp)) : Rat(1);
                    e.coords[{t.slot, t.copy_base + t.copy_step * j}] += coeff;
                }
                h.generators.push_back(canonicalize(ambient, std::move(e)));
            }
            break;
        }
        case WitnessKind::FreeRank: {
            for (long c = 0; c < i; ++c) {
                Element e;
                e.coords[{slot, c}] = Rat(1);
                h.generators.push_back(std::move(e));
            }
            break;
        }
        case WitnessKind::Independence:
            h.generators.push_back(generator);
            break;
        case WitnessKind::PrimaryLin: {
            long k = (long)lin_slots.size();
            for (long j = 0; j < i; ++j) {
                const LinComponent& c = lin_slots[(std::size_t)(j % k)];
                Element e;
                e.coords[{c.slot, c.start_copy + j / k}] = Rat(1);
                h.generators.push_back(std::move(e));
            }
            break;
        }
    }
    return h;
}

Int NonInertialWitness::growth(long i) const {
    if (i < 1) throw std::invalid_argument("witness family index must be >= 1");
    switch (kind) {
        case WitnessKind::Diagonal:
            return pow_int(chain_factor, i);
        case WitnessKind::FreeRank:
            return pow_int(abs_int(den(mn)), i);
        case WitnessKind::Independence:
            return 1;  // certified through rank, not order
        case WitnessKind::PrimaryLin: {
            Int g = 1;
            long k = (long)lin_slots.size();
            for (long j = 0; j < i; ++j) g *= lin_slots[(std::size_t)(j % k)].order_factor;
            return g;
        }
    }
    return 1;
}

std::string NonInertialWitness::growth_expr() const {
    switch (kind) {
        case WitnessKind::Diagonal:
            return chain_factor.str() + "^i";
        case WitnessKind::FreeRank:
            return abs_int(den(mn)).str() + "^i";
        case WitnessKind::Independence:
            return "torsion-free rank >= 1";
        case WitnessKind::PrimaryLin: {
            std::string s = "prod of first i factors in (";
            for (std::size_t j = 0; j < lin_slots.size(); ++j) {
                if (j) s += ",";
                s += lin_slots[j].order_factor.str();
            }
            return s + ") cycled";
        }
    }
    return "";
}

NonInertialWitness diagonal_witness(const GroupDescriptor& g, const Int& p,
                                    const Scalar& alpha, const Rat& mn, long K) {
    if (!is_prime(p)) throw std::invalid_argument("diagonal witness: p must be prime");
    if (den(mn) % p != 0)
        throw std::invalid_argument("diagonal witness: p must divide the denominator of m/n");
    if (num(mn) % p == 0)
        throw std::invalid_argument("diagonal witness: p must not divide the numerator of m/n");
    if (den(alpha.value) % p == 0)
        throw std::invalid_argument("diagonal witness: alpha is not p-integral");
    if (alpha.value == mn)
        throw std::invalid_argument(
            "diagonal witness: alpha = m/n acts as one multiplication (inertial case)");

    NonInertialWitness w;
    w.kind = WitnessKind::Diagonal;
    w.mode = WitnessMode::RIN;
    w.ambient = g;
    w.p = p;
    w.alpha = alpha;
    w.mn = mn;

    bool havePrufer = false, haveLocal = false;
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        const Atom& a = g.slots[s].atom;
        if (!havePrufer && a.kind == AtomKind::Prufer && a.p == p) {
            w.prufer_slot = s;
            havePrufer = true;
        }
        if (!haveLocal && a.kind == AtomKind::Localized && a.pi.contains(p)) {
            w.local_slot = s;
            haveLocal = true;
        }
    }
    if (!havePrufer || !haveLocal)
        throw std::invalid_argument(
            "diagonal witness: ambient needs a Z(p^inf) slot and a p-divisible localized slot");

    w.chain.push_back({w.prufer_slot, 0, 0, true, 0});
    w.chain.push_back({w.local_slot, 0, 0, true, 0});
    w.chain_start = 0;
    w.chain_factor = p;

    // Self-check against the canonical alpha ⊕ m/n action.
    Endomorphism phi = zero_endo(g);
    phi.blocks.push_back({{w.prufer_slot}, alpha});
    phi.blocks.push_back({{w.local_slot}, Scalar(mn)});
    self_verify(w, phi, K);
    return w;
}

NonInertialWitness free_rank_witness(const GroupDescriptor& g, const Rat& mn, long K) {
    Int n = abs_int(den(mn));
    if (n == 1)
        throw std::invalid_argument("free rank witness: integer multiplication is inertial here");

    NonInertialWitness w;
    w.kind = WitnessKind::FreeRank;
    w.mode = WitnessMode::RIN;
    w.ambient = g;
    w.mn = mn;

    bool found = false;
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        const Atom& a = g.slots[s].atom;
        if (a.kind == AtomKind::Localized && g.slots[s].mult.omega && is_pi_number(n, a.pi)) {
            w.slot = s;
            found = true;
            break;
        }
    }
    if (!found)
        throw std::invalid_argument(
            "free rank witness: no omega-rank free slot admitting multiplication by m/n");

    Endomorphism phi = zero_endo(g);
    phi.blocks.push_back({{w.slot}, Scalar(mn)});
    self_verify(w, phi, K);
    return w;
}

NonInertialWitness independence_witness(const GroupDescriptor& g, const Endomorphism& phi,
                                        long K) {
    if (!g.is_torsion_free())
        throw std::invalid_argument("independence witness: ambient must be torsion-free");

    NonInertialWitness w;
    w.kind = WitnessKind::Independence;
    w.mode = WitnessMode::RIN;
    w.ambient = g;

    // Scan unit generators a = e_{s,c}; phi(a) is independent of a exactly
    // when it has a nonzero coordinate off (s,c). Only copies near the
    // matrix/finitary support can produce one.
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        long copies = g.slots[s].mult.omega ? max_touched_copy(phi, s) + 2
                                            : g.slots[s].mult.count;
        for (long c = 0; c < copies; ++c) {
            Element a = unit_element(g, {s, c});
            Element b = apply(phi, a);
            for (const auto& [key, val] : b.coords)
                if (val != 0 && !(key.slot == s && key.copy == c)) {
                    w.generator = std::move(a);
                    self_verify(w, phi, K);
                    return w;
                }
        }
    }
    throw std::invalid_argument(
        "independence witness: no independent generator (phi may be a multiplication)");
}

NonInertialWitness primary_lin_witness(const Endomorphism& phi, long K) {
    const GroupDescriptor& g = phi.ambient;
    if (!g.is_periodic())
        throw std::invalid_argument("primary LIN witness: ambient must be periodic");

    NonInertialWitness w;
    w.kind = WitnessKind::PrimaryLin;
    w.mode = WitnessMode::LIN;
    w.ambient = g;

    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        const Atom& a = g.slots[s].atom;
        if (a.kind != AtomKind::Cyclic || !g.slots[s].mult.omega) continue;
        Rat sc = phi.scalar_on(s);
        long v = num(sc) == 0 ? a.e : std::min(valuation(num(sc), a.p), (long)a.e);
        if (v < 1) continue;  // invertible multiplication on this component
        w.lin_slots.push_back({s, max_touched_copy(phi, s) + 1, pow_int(a.p, v)});
    }
    if (w.lin_slots.empty())
        throw std::invalid_argument(
            "primary LIN witness: fewer than omega bad components (LIN may hold)");

    self_verify(w, phi, K);
    return w;
}

NonInertialWitness section_chain_witness(const GroupDescriptor& g, const Int& p,
                                         std::vector<NonInertialWitness::ChainTerm> chain,
                                         long chain_start, const Int& chain_factor,
                                         const Endomorphism& phi, long K) {
    if (!is_prime(p)) throw std::invalid_argument("section chain witness: p must be prime");
    if (chain.empty() || chain_start < 0 || chain_factor < 2)
        throw std::invalid_argument("section chain witness: malformed schema");
    for (const auto& t : chain) {
        if (t.slot >= g.slots.size() || t.copy_step < 0 || t.fixed_exp < 0)
            throw std::invalid_argument("section chain witness: malformed term");
        const Slot& sl = g.slots[t.slot];
        long top = t.copy_base + t.copy_step * (chain_start + K);
        if (!sl.mult.omega && top >= sl.mult.count)
            throw std::invalid_argument("section chain witness: term exceeds slot multiplicity");
    }

    NonInertialWitness w;
    w.kind = WitnessKind::Diagonal;
    w.mode = WitnessMode::RIN;
    w.ambient = g;
    w.p = p;
    w.chain = std::move(chain);
    w.chain_start = chain_start;
    w.chain_factor = chain_factor;
    self_verify(w, phi, K);
    return w;
}

WitnessCheck verify_witness(const NonInertialWitness& w, const Endomorphism& phi, long K) {
    if (!(phi.ambient == w.ambient))
        throw std::invalid_argument("verify_witness: ambient mismatch");
    if (w.kind == WitnessKind::Independence) {
        SubgroupHandle x = w.family(1);
        if (section_rank_growth(w.ambient, x, image_handle(phi, x)) < 1) return {false, 1};
        return {true, -1};
    }
    long precision = std::max(kDefaultPrecision, K + 5);
    for (long i = 1; i <= K; ++i) {
        SubgroupHandle x = w.family(i);
        SubgroupHandle y = image_handle(phi, x);
        Int bound = w.growth(i);
        SectionSize s =
            w.mode == WitnessMode::RIN
                ? section_order(w.ambient, x, y, precision, bound)
                : is_commensurable(w.ambient, x, y, precision, bound).x_over_meet;
        if (!meets_bound(s, bound)) return {false, i};
    }
    return {true, -1};
}

}  // namespace inertia
