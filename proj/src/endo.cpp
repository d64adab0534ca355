#include "inertia/endo.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace inertia {

namespace {

const Slot& slot_of(const GroupDescriptor& g, std::size_t s) {
    if (s >= g.slots.size()) throw std::domain_error("slot index out of range");
    return g.slots[s];
}

bool coord_in_range(const GroupDescriptor& g, CoordKey c) {
    const Slot& s = slot_of(g, c.slot);
    return c.copy >= 0 && (s.mult.omega || c.copy < s.mult.count);
}

bool scalar_valid(const Atom& atom, const Rat& r) {
    if (r == 0) return true;
    switch (atom.kind) {
        case AtomKind::Cyclic:
        case AtomKind::Prufer:
            return den(r) % atom.p != 0;
        case AtomKind::Localized:
            return is_pi_number(den(r), atom.pi);
    }
    return false;
}

bool entry_valid(const Atom& src, const Atom& dst, const Rat& r) {
    if (r == 0) return true;
    switch (src.kind) {
        case AtomKind::Cyclic:
            if (dst.kind == AtomKind::Cyclic)
                return dst.p == src.p && den(r) % src.p != 0 &&
                       valuation(num(r), src.p) + src.e >= dst.e;
            if (dst.kind == AtomKind::Prufer)
                return dst.p == src.p &&
                       (den(r) % src.p != 0 || valuation(den(r), src.p) <= src.e);
            return false;  // torsion cannot map into a torsion-free atom
        case AtomKind::Prufer:
            // A divisible p-group maps only into divisible p-torsion.
            return dst.kind == AtomKind::Prufer && dst.p == src.p && den(r) % src.p != 0;
        case AtomKind::Localized:
            if (dst.kind == AtomKind::Localized)
                return src.pi.subset_of(dst.pi) && is_pi_number(den(r), dst.pi);
            if (dst.kind == AtomKind::Cyclic)
                return !src.pi.contains(dst.p) && den(r) % dst.p != 0;
            if (dst.kind == AtomKind::Prufer) return !src.pi.contains(dst.p);
            return false;
    }
    return false;
}

// The pi-part of m: product of p^{v_p(m)} over p in pi.
Int pi_part(Int m, const PrimeSet& pi) {
    Int out = 1;
    for (const auto& p : factor(m))
        if (pi.contains(p)) out *= pow_int(p, valuation(m, p));
    return out;
}

// Residue of w * a modulo m on a coordinate of the given atom. Assumes the
// weight passed validation. On Localized(pi) coordinates the pi-part of m is
// annihilated (the coordinate group is pi-divisible) and the rest is computed
// by modular inversion; the two halves are recombined by CRT.
Int weight_term(const Atom& atom, const Rat& w, const Rat& a, const Int& m) {
    if (w == 0 || a == 0 || m == 1) return 0;
    Rat t = w * a;
    if (t == 0) return 0;
    if (atom.kind == AtomKind::Localized) {
        Int mpi = pi_part(m, atom.pi);
        Int m2 = m / mpi;
        if (m2 == 1) return 0;
        Int v = num(t) % m2 * inv_mod(den(t), m2) % m2;
        if (v < 0) v += m2;
        if (mpi == 1) return v;
        Int x = mpi * (v * inv_mod(mpi, m2) % m2) % m;
        if (x < 0) x += m;
        return x;
    }
    Int v = num(t) % m * inv_mod(den(t), m) % m;
    if (v < 0) v += m;
    return v;
}

bool weight_valid(const Atom& atom, const Rat& w, const Int& m) {
    if (w == 0) return true;
    switch (atom.kind) {
        case AtomKind::Cyclic: {
            if (boost::multiprecision::gcd(den(w), m) != 1) return false;
            // w * p^e must vanish mod m.
            return weight_term(atom, w, Rat(pow_int(atom.p, atom.e)), m) == 0;
        }
        case AtomKind::Prufer:
            return false;  // no nonzero functional on a divisible p-group
        case AtomKind::Localized: {
            // The pi-part of the modulus is annihilated by the CRT evaluation
            // rule; only the remaining primes must be invertible on den(w).
            for (const auto& q : factor(m))
                if (!atom.pi.contains(q) && den(w) % q == 0) return false;
            return true;
        }
    }
    return false;
}

// Does scalar s act as the zero endomorphism of the atom?
bool acts_as_zero(const Atom& atom, const Rat& s) {
    if (s == 0) return true;
    if (atom.kind == AtomKind::Cyclic) return canonical_coord(atom, s) == 0;
    return false;
}

// Does matrix entry r define the zero map src -> dst?
bool entry_is_zero_map(const Atom& src, const Atom& dst, const Rat& r) {
    if (r == 0) return true;
    if (src.kind == AtomKind::Prufer) return false;  // nonzero entry: infinite image
    if (dst.kind == AtomKind::Localized) return false;
    return canonical_coord(dst, r) == 0;
}

// gcd of the values the contribution's residue functional can take.
Int contribution_gcd(const GroupDescriptor& g, const FinitaryContribution& c) {
    Int d = c.modulus;
    for (const auto& [k, w] : c.weights) {
        const Atom& atom = g.slots[k.slot].atom;
        if (atom.kind == AtomKind::Prufer) continue;
        Int r = weight_term(atom, w, Rat(1), c.modulus);
        d = boost::multiprecision::gcd(d, r);
    }
    return d;
}

}  // namespace

Rat Endomorphism::scalar_on(std::size_t slot) const {
    for (const auto& b : blocks)
        if (b.slots.count(slot)) return b.scalar.value;
    return Rat(0);
}

Endomorphism multiplication(const GroupDescriptor& g, const Rat& r) {
    Endomorphism e;
    e.ambient = g;
    if (r != 0 && !g.slots.empty()) {
        ScalarBlock b;
        b.scalar = Scalar(r);
        for (std::size_t i = 0; i < g.slots.size(); ++i) b.slots.insert(i);
        e.blocks.push_back(std::move(b));
    }
    return e;
}

Endomorphism zero_endo(const GroupDescriptor& g) { return multiplication(g, Rat(0)); }

WellDefined is_well_defined(const Endomorphism& phi) {
    const GroupDescriptor& g = phi.ambient;
    auto fail = [](std::string s) { return WellDefined{false, std::move(s)}; };

    std::set<std::size_t> covered;
    for (const auto& b : phi.blocks) {
        for (auto s : b.slots) {
            if (s >= g.slots.size()) return fail("block names slot out of range");
            if (!covered.insert(s).second) return fail("blocks overlap on a slot");
            if (!scalar_valid(g.slots[s].atom, b.scalar.value))
                return fail("scalar " + b.scalar.value.str() + " ill-defined on " +
                            g.slots[s].atom.str());
        }
    }
    for (const auto& [key, r] : phi.matrix.entries) {
        const auto& [src, dst] = key;
        if (r == 0) continue;
        if (!coord_in_range(g, src) || !coord_in_range(g, dst))
            return fail("matrix coordinate out of range");
        if (g.slots[src.slot].mult.omega || g.slots[dst.slot].mult.omega)
            return fail("matrix entries must connect finite-multiplicity slots");
        if (!entry_valid(g.slots[src.slot].atom, g.slots[dst.slot].atom, r))
            return fail("matrix entry " + r.str() + " ill-defined: " +
                        g.slots[src.slot].atom.str() + " -> " + g.slots[dst.slot].atom.str());
    }
    for (const auto& c : phi.finitary.contributions) {
        if (c.modulus < 1) return fail("finitary modulus must be positive");
        auto ord = elem_order(g, c.target);
        if (!ord) return fail("finitary target has infinite order");
        if (c.modulus % *ord != 0)
            return fail("finitary target order does not divide the modulus");
        for (const auto& [k, w] : c.weights) {
            if (!coord_in_range(g, k)) return fail("finitary weight out of range");
            if (!weight_valid(g.slots[k.slot].atom, w, c.modulus))
                return fail("finitary weight " + w.str() + " ill-defined on " +
                            g.slots[k.slot].atom.str());
        }
    }
    return {};
}

Element apply(const Endomorphism& phi, const Element& a) {
    const GroupDescriptor& g = phi.ambient;
    Element out;
    for (const auto& [k, v] : a.coords) {
        Rat s = phi.scalar_on(k.slot);
        if (s != 0) out.coords[k] += s * v;
    }
    for (const auto& [key, r] : phi.matrix.entries) {
        const auto& [src, dst] = key;
        Rat v = a.at(src);
        if (v != 0 && r != 0) out.coords[dst] += r * v;
    }
    for (const auto& c : phi.finitary.contributions) {
        Int rho = 0;
        for (const auto& [k, w] : c.weights)
            rho = (rho + weight_term(g.slots[k.slot].atom, w, a.at(k), c.modulus)) % c.modulus;
        if (rho != 0)
            for (const auto& [k, v] : c.target.coords) out.coords[k] += Rat(rho) * v;
    }
    return canonicalize(g, std::move(out));
}

namespace {

void require_same_ambient(const Endomorphism& a, const Endomorphism& b) {
    if (!(a.ambient == b.ambient)) throw std::invalid_argument("ambient mismatch");
}

// Rebuild a canonical block list from per-slot scalars (zero slots uncovered).
std::vector<ScalarBlock> blocks_from_scalars(std::size_t nslots,
                                             const std::function<Rat(std::size_t)>& f) {
    std::vector<ScalarBlock> out;
    std::map<Rat, std::size_t> seen;  // scalar value -> index in out
    for (std::size_t s = 0; s < nslots; ++s) {
        Rat v = f(s);
        if (v == 0) continue;
        auto it = seen.find(v);
        if (it == seen.end()) {
            seen[v] = out.size();
            out.push_back({{s}, Scalar(v)});
        } else {
            out[it->second].slots.insert(s);
        }
    }
    return out;
}

}  // namespace

Endomorphism add(const Endomorphism& phi, const Endomorphism& psi) {
    require_same_ambient(phi, psi);
    Endomorphism r;
    r.ambient = phi.ambient;
    r.blocks = blocks_from_scalars(r.ambient.slots.size(), [&](std::size_t s) {
        return phi.scalar_on(s) + psi.scalar_on(s);
    });
    r.matrix = phi.matrix;
    for (const auto& [k, v] : psi.matrix.entries) {
        Rat& e = r.matrix.entries[k];
        e += v;
        if (e == 0) r.matrix.entries.erase(k);
    }
    r.finitary = phi.finitary;
    r.finitary.contributions.insert(r.finitary.contributions.end(),
                                    psi.finitary.contributions.begin(),
                                    psi.finitary.contributions.end());
    return r;
}

Endomorphism negate(const Endomorphism& phi) {
    Endomorphism r;
    r.ambient = phi.ambient;
    for (const auto& b : phi.blocks) {
        ScalarBlock nb = b;
        nb.scalar.value = -nb.scalar.value;
        r.blocks.push_back(std::move(nb));
    }
    for (const auto& [k, v] : phi.matrix.entries) r.matrix.entries[k] = -v;
    for (const auto& c : phi.finitary.contributions) {
        FinitaryContribution nc = c;
        nc.target = elem_neg(phi.ambient, nc.target);
        r.finitary.contributions.push_back(std::move(nc));
    }
    return r;
}

Endomorphism compose(const Endomorphism& phi, const Endomorphism& psi) {
    require_same_ambient(phi, psi);
    const GroupDescriptor& g = phi.ambient;
    Endomorphism r;
    r.ambient = g;
    r.blocks = blocks_from_scalars(g.slots.size(), [&](std::size_t s) {
        return phi.scalar_on(s) * psi.scalar_on(s);
    });
    // Matrix of phi∘psi: phi-scalar * psi-entry + phi-entry * psi-scalar
    // + entrywise product through middle coordinates.
    MatrixPart m;
    for (const auto& [k, v] : psi.matrix.entries) {
        Rat t = phi.scalar_on(k.second.slot) * v;
        if (t != 0) m.entries[k] += t;
    }
    for (const auto& [k, v] : phi.matrix.entries) {
        Rat t = v * psi.scalar_on(k.first.slot);
        if (t != 0) m.entries[k] += t;
    }
    for (const auto& [kp, vp] : phi.matrix.entries)
        for (const auto& [kq, vq] : psi.matrix.entries)
            if (kq.second == kp.first) {
                Rat t = vp * vq;
                if (t != 0) m.entries[{kq.first, kp.second}] += t;
            }
    for (auto it = m.entries.begin(); it != m.entries.end();)
        it = it->second == 0 ? m.entries.erase(it) : std::next(it);
    r.matrix = std::move(m);

    // psi's finitary summand, pushed through phi: same residues, images of
    // the targets.
    for (const auto& c : psi.finitary.contributions) {
        FinitaryContribution nc;
        nc.weights = c.weights;
        nc.modulus = c.modulus;
        nc.target = apply(phi, c.target);
        if (!nc.target.is_zero()) r.finitary.contributions.push_back(std::move(nc));
    }
    // phi's finitary summand, pulled back through psi's main part. Torsion
    // coordinates pull back through the canonical integer representative of
    // the acting coefficient (the rational itself is only defined up to the
    // coordinate's modulus).
    auto pullback_coeff = [&](const Atom& dst_atom, const Rat& coeff) -> Rat {
        if (coeff == 0) return Rat(0);
        if (dst_atom.kind == AtomKind::Cyclic) return canonical_coord(dst_atom, coeff);
        return coeff;
    };
    for (const auto& c : phi.finitary.contributions) {
        FinitaryContribution nc;
        nc.modulus = c.modulus;
        nc.target = c.target;
        for (const auto& [d, wd] : c.weights) {
            if (wd == 0) continue;
            const Atom& datom = g.slots[d.slot].atom;
            Rat sigma = psi.scalar_on(d.slot);
            if (sigma != 0) {
                Rat t = wd * pullback_coeff(datom, sigma);
                if (t != 0) nc.weights[d] += t;
            }
            for (const auto& [k, v] : psi.matrix.entries)
                if (k.second == d) {
                    Rat t = wd * pullback_coeff(datom, v);
                    // Pulling a Localized(pi_d) coordinate back to a smaller
                    // localization: the evaluation rule at the source no
                    // longer annihilates the primes of pi_d \ pi_src, so an
                    // integer idempotent (0 on that part of the modulus, 1
                    // elsewhere) restores the original semantics.
                    const Atom& satom = g.slots[k.first.slot].atom;
                    if (t != 0 && datom.kind == AtomKind::Localized &&
                        satom.kind == AtomKind::Localized) {
                        Int extra = 1;
                        for (const auto& q : factor(nc.modulus))
                            if (datom.pi.contains(q) && !satom.pi.contains(q))
                                extra *= pow_int(q, valuation(nc.modulus, q));
                        if (extra > 1) {
                            Int rest = nc.modulus / extra;
                            t *= rest == 1 ? Rat(0)
                                           : Rat(extra * inv_mod(extra % rest, rest));
                        }
                    }
                    if (t != 0) nc.weights[k.first] += t;
                }
        }
        for (auto it = nc.weights.begin(); it != nc.weights.end();)
            it = it->second == 0 ? nc.weights.erase(it) : std::next(it);
        if (!nc.weights.empty() && !nc.target.is_zero())
            r.finitary.contributions.push_back(std::move(nc));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Finite-image detection (structural, never sampled)
// ---------------------------------------------------------------------------

namespace {

// Divide every torsion coordinate of e by the unit q (q coprime to each
// coordinate's local modulus).
Element divide_torsion_unit(const GroupDescriptor& g, const Element& e, const Int& q) {
    Element out;
    for (const auto& [k, v] : e.coords) out.coords[k] = v / Rat(q);
    return canonicalize(g, std::move(out));
}

}  // namespace

SectionSize image_finite(const Endomorphism& phi) {
    const GroupDescriptor& g = phi.ambient;
    auto entry_at = [&](CoordKey a, CoordKey b) {
        auto it = phi.matrix.entries.find({a, b});
        return it == phi.matrix.entries.end() ? Rat(0) : it->second;
    };

    // Infinite-direction scan.
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        const Slot& sl = g.slots[s];
        Rat sigma = phi.scalar_on(s);
        if (sl.mult.omega) {
            if (!acts_as_zero(sl.atom, sigma))
                return SectionSize::infinite("nonzero multiplication by " + sigma.str() +
                                             " on " + sl.atom.str() + "^w");
            continue;
        }
        if (sl.atom.kind == AtomKind::Cyclic) continue;
        for (long c = 0; c < sl.mult.count; ++c) {
            CoordKey src{s, c};
            // Effective coefficients into infinite atoms.
            for (std::size_t s2 = 0; s2 < g.slots.size(); ++s2) {
                const Slot& t = g.slots[s2];
                if (t.atom.kind != sl.atom.kind) continue;
                if (t.mult.omega) continue;
                for (long c2 = 0; c2 < t.mult.count; ++c2) {
                    CoordKey dst{s2, c2};
                    Rat eff = entry_at(src, dst);
                    if (src == dst) eff += sigma;
                    if (eff != 0)
                        return SectionSize::infinite(
                            "coefficient " + eff.str() + " from " + sl.atom.str() +
                            " into " + t.atom.str());
                }
            }
        }
    }

    // Finite image: span of the images of a generating set.
    std::vector<Element> gens;
    std::set<CoordKey> source_coords;
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        const Slot& sl = g.slots[s];
        if (sl.mult.omega) continue;
        if (sl.atom.kind == AtomKind::Prufer) continue;  // contributes zero here
        for (long c = 0; c < sl.mult.count; ++c) source_coords.insert({s, c});
    }
    for (const auto& c : phi.finitary.contributions)
        for (const auto& [k, w] : c.weights)
            if (w != 0 && g.slots[k.slot].atom.kind != AtomKind::Prufer)
                source_coords.insert(k);

    std::set<Element> seen;
    for (const auto& c : source_coords) {
        Element base;
        base.coords[c] = Rat(1);
        Element img = apply(phi, canonicalize(g, base));
        const Atom& atom = g.slots[c.slot].atom;
        if (atom.kind != AtomKind::Localized || atom.pi.empty()) {
            if (!img.is_zero() && seen.insert(img).second) gens.push_back(img);
            continue;
        }
        // pi-divisions of a Localized source: the images of e_c / y cycle
        // through unit multiples on the (finite) torsion targets.
        std::vector<Element> work{img};
        while (!work.empty()) {
            Element cur = std::move(work.back());
            work.pop_back();
            if (cur.is_zero() || !seen.insert(cur).second) continue;
            gens.push_back(cur);
            for (const auto& p : atom.pi.primes()) work.push_back(divide_torsion_unit(g, cur, p));
        }
    }

    if (gens.empty()) return SectionSize::finite(1);

    // All images are torsion, supported on finitely many coordinates: count
    // the span by lattice index against the modulus lattice.
    std::map<CoordKey, Int> moduli;
    for (const auto& e : gens)
        for (const auto& [k, v] : e.coords) {
            const Atom& atom = g.slots[k.slot].atom;
            if (atom.kind == AtomKind::Localized)
                throw std::logic_error("image_finite: free coordinate escaped the scan");
            Int md = atom.kind == AtomKind::Cyclic
                         ? atom.order()
                         : pow_int(atom.p, std::max<long>(1, valuation(den(v), atom.p)));
            Int& cur = moduli[k];
            cur = cur == 0 ? md : boost::multiprecision::lcm(cur, md);
        }
    std::vector<CoordKey> cols;
    for (const auto& [k, v] : moduli) cols.push_back(k);
    Mat span(gens.size() + cols.size(), cols.size());
    Mat mod(cols.size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        mod(j, j) = moduli[cols[j]];
        span(gens.size() + j, j) = moduli[cols[j]];
    }
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (const auto& [k, v] : gens[i].coords) {
            std::size_t j = std::lower_bound(cols.begin(), cols.end(), k) - cols.begin();
            // Cyclic coordinates are integers already; Prufer values a/p^i are
            // integerized against the column scale p^L (unit = 1/p^L).
            Rat scaled = g.slots[k.slot].atom.kind == AtomKind::Prufer
                             ? v * Rat(moduli[cols[j]])
                             : v;
            if (den(scaled) != 1) throw std::logic_error("image_finite: non-integral row");
            span(i, j) = num(scaled);
        }
    auto idx = lattice_index(span, mod);
    if (!idx) throw std::logic_error("image_finite: index computation failed");
    return SectionSize::finite(*idx);
}

std::pair<bool, SectionSize> equal_mod_finitary(const Endomorphism& phi,
                                                const Endomorphism& psi) {
    SectionSize s = image_finite(add(phi, negate(psi)));
    return {s.is_finite(), s};
}

bool acts_as_scalar(const Endomorphism& phi, const Rat& r) {
    const GroupDescriptor& g = phi.ambient;
    auto entry_at = [&](CoordKey a, CoordKey b) {
        auto it = phi.matrix.entries.find({a, b});
        return it == phi.matrix.entries.end() ? Rat(0) : it->second;
    };
    std::set<CoordKey> touched;
    for (const auto& [k, v] : phi.matrix.entries) {
        if (v == 0) continue;
        touched.insert(k.first);
        touched.insert(k.second);
    }
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        Rat diff = phi.scalar_on(s) - r;
        // Slots with untouched copies (always the case for omega slots) need
        // the block scalar itself to act as r.
        if (!acts_as_zero(g.slots[s].atom, diff)) {
            bool all_touched = !g.slots[s].mult.omega;
            if (all_touched)
                for (long c = 0; c < g.slots[s].mult.count; ++c)
                    if (!touched.count({s, c})) all_touched = false;
            if (!all_touched) return false;
        }
    }
    for (const auto& src : touched) {
        const Atom& satom = g.slots[src.slot].atom;
        for (const auto& dst : touched) {
            Rat eff = entry_at(src, dst);
            if (src == dst) eff += phi.scalar_on(src.slot) - r;
            if (eff == 0) continue;
            if (!entry_is_zero_map(satom, g.slots[dst.slot].atom, eff)) return false;
        }
    }
    for (const auto& c : phi.finitary.contributions) {
        Int d = contribution_gcd(phi.ambient, c);
        if (d % c.modulus == 0) continue;
        Element scaled = elem_scale(g, Rat(d), c.target);
        if (!scaled.is_zero()) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Structural inverse
// ---------------------------------------------------------------------------

Endomorphism invert(const Endomorphism& phi) {
    const GroupDescriptor& g = phi.ambient;
    if (!phi.finitary.empty())
        throw std::domain_error("invert: finitary part present");
    std::set<CoordKey> touched;
    for (const auto& [k, v] : phi.matrix.entries)
        if (v != 0) {
            touched.insert(k.first);
            touched.insert(k.second);
        }
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        if (phi.scalar_on(s) != 0) continue;
        // A slot with zero scalar is only invertible if the matrix covers
        // every copy.
        if (g.slots[s].mult.omega) throw std::domain_error("invert: zero scalar on omega slot");
        for (long c = 0; c < g.slots[s].mult.count; ++c)
            if (!touched.count({s, c}))
                throw std::domain_error("invert: kills a copy of slot " + std::to_string(s));
    }

    Endomorphism inv;
    inv.ambient = g;
    inv.blocks = blocks_from_scalars(g.slots.size(), [&](std::size_t s) {
        Rat v = phi.scalar_on(s);
        return v == 0 ? Rat(0) : Rat(1) / v;
    });
    if (!touched.empty()) {
        // Invert the total action (scalar diagonal + entries) on the touched
        // block as an exact rational matrix.
        std::vector<CoordKey> cols(touched.begin(), touched.end());
        std::size_t n = cols.size();
        std::vector<std::vector<Rat>> a(n, std::vector<Rat>(2 * n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                auto it = phi.matrix.entries.find({cols[i], cols[j]});
                if (it != phi.matrix.entries.end()) a[i][j] = it->second;
            }
            a[i][i] += phi.scalar_on(cols[i].slot);
            a[i][n + i] = 1;
        }
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t piv = c;
            while (piv < n && a[piv][c] == 0) ++piv;
            if (piv == n) throw std::domain_error("invert: singular matrix block");
            std::swap(a[piv], a[c]);
            Rat d = a[c][c];
            for (auto& x : a[c]) x /= d;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == c || a[i][c] == 0) continue;
                Rat f = a[i][c];
                for (std::size_t j = 0; j < 2 * n; ++j) a[i][j] -= f * a[c][j];
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                Rat e = a[i][n + j];
                if (i == j) e -= inv.scalar_on(cols[i].slot);
                if (e != 0) inv.matrix.entries[{cols[i], cols[j]}] = e;
            }
    }
    if (auto wd = is_well_defined(inv); !wd)
        throw std::domain_error("invert: inverse not well-defined (" + wd.diagnostic + ")");
    if (!acts_as_scalar(compose(phi, inv), Rat(1)) || !acts_as_scalar(compose(inv, phi), Rat(1)))
        throw std::domain_error("invert: verification failed");
    return inv;
}

// ---------------------------------------------------------------------------
// Restriction and quotient
// ---------------------------------------------------------------------------

Endomorphism restrict(const Endomorphism& phi, const SubgroupHandle& a0) {
    const GroupDescriptor& g = phi.ambient;
    for (const auto& gen : a0.generators)
        if (!subgroup_contains(g, a0, apply(phi, gen)))
            throw std::domain_error("restrict: subgroup not invariant");

    GroupDescriptor derived;
    std::vector<Rat> lambdas;
    for (const auto& gen : a0.generators) {
        Element img = apply(phi, gen);
        // Determine a scalar lambda with phi(gen) = lambda * gen.
        std::optional<Rat> lambda;
        auto ord = elem_order(g, gen);
        if (!ord) {
            for (const auto& [k, v] : gen.coords)
                if (g.slots[k.slot].atom.kind == AtomKind::Localized && v != 0) {
                    lambda = img.at(k) / v;
                    break;
                }
        } else {
            Int n = *ord;
            if (n > 100000)
                throw std::domain_error("restrict: torsion generator order too large");
            for (Int m = 0; m < n; ++m)
                if (elem_scale(g, Rat(m), gen) == img) {
                    lambda = Rat(m);
                    break;
                }
        }
        if (!lambda || !(elem_scale(g, *lambda, gen) == img))
            throw std::domain_error("restrict: action on a generator is not scalar");
        lambdas.push_back(*lambda);

        // The derived slot for this generator.
        PrimeSet closure;
        for (const auto& [k, v] : gen.coords) {
            auto it = a0.divisibleClosure.find(k.slot);
            if (it != a0.divisibleClosure.end()) closure = closure.unite(it->second);
        }
        if (!ord) {
            derived.slots.push_back({Atom::localized(closure), Multiplicity::finite(1)});
        } else if (!closure.empty()) {
            if (closure.primes().size() != 1)
                throw std::domain_error("restrict: unsupported torsion closure");
            derived.slots.push_back(
                {Atom::prufer(*closure.primes().begin()), Multiplicity::finite(1)});
        } else {
            for (const auto& p : factor(*ord))
                derived.slots.push_back(
                    {Atom::cyclic(p, valuation(*ord, p)), Multiplicity::finite(1)});
        }
    }

    Endomorphism out;
    out.ambient = derived;
    std::size_t slot = 0;
    std::vector<ScalarBlock> blocks;
    for (std::size_t i = 0; i < a0.generators.size(); ++i) {
        auto ord = elem_order(g, a0.generators[i]);
        std::size_t width = 1;
        if (ord && !derived.slots[slot].atom.is_finite()) width = 1;
        else if (ord) width = factor(*ord).size();
        for (std::size_t k = 0; k < width; ++k, ++slot) {
            if (lambdas[i] == 0) continue;
            blocks.push_back({{slot}, Scalar(lambdas[i])});
        }
    }
    out.blocks = std::move(blocks);
    if (auto wd = is_well_defined(out); !wd)
        throw std::domain_error("restrict: derived endomorphism ill-defined (" +
                                wd.diagnostic + ")");
    return out;
}

Endomorphism induced_on_quotient(const Endomorphism& phi, const SubgroupHandle& v) {
    const GroupDescriptor& g = phi.ambient;
    for (const auto& gen : v.generators)
        if (!subgroup_contains(g, v, apply(phi, gen)))
            throw std::domain_error("induced_on_quotient: subgroup not invariant");

    // Per-coordinate description of V: either a full coordinate (dropped in
    // the quotient) or an integer multiple of one coordinate.
    std::map<CoordKey, Int> killed;       // coordinate -> positive modulus n
    std::set<CoordKey> dropped;           // coordinate removed entirely
    for (const auto& gen : v.generators) {
        if (gen.coords.size() != 1)
            throw std::domain_error("induced_on_quotient: generators must be single-coordinate");
        auto [k, val] = *gen.coords.begin();
        const Atom& atom = g.slots[k.slot].atom;
        bool flagged = v.divisibleClosure.count(k.slot) > 0;
        switch (atom.kind) {
            case AtomKind::Prufer:
                if (!flagged)
                    throw std::domain_error(
                        "induced_on_quotient: unsupported Prufer quotient (finite kernel)");
                dropped.insert(k);
                break;
            case AtomKind::Localized: {
                if (flagged && v.divisibleClosure.at(k.slot) == atom.pi) {
                    dropped.insert(k);
                    break;
                }
                if (flagged)
                    throw std::domain_error("induced_on_quotient: partial closure unsupported");
                if (den(val) != 1)
                    throw std::domain_error("induced_on_quotient: fractional kernel generator");
                Int n = boost::multiprecision::abs(num(val));
                // The pi-part of n is absorbed by divisibility.
                for (const auto& p : factor(n))
                    if (atom.pi.contains(p)) n /= pow_int(p, valuation(n, p));
                if (n == 1) dropped.insert(k);
                else killed[k] = n;
                break;
            }
            case AtomKind::Cyclic: {
                Int q = atom.order();
                Int n = boost::multiprecision::gcd(num(val), q);  // canonical coord: integer
                if (n == q || n == 0) continue;                   // trivial generator
                if (n == 1) dropped.insert(k);
                else killed[k] = n;
                break;
            }
        }
    }

    // Build the quotient descriptor and the coordinate mapping.
    GroupDescriptor out;
    std::map<CoordKey, std::vector<std::pair<CoordKey, Int>>> remap;  // old -> [(new, p-power)]
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        const Slot& sl = g.slots[s];
        if (sl.mult.omega) {
            // Untouched omega slots pass through unchanged.
            for (const auto& [k, n] : killed)
                if (k.slot == s)
                    throw std::domain_error("induced_on_quotient: omega slot quotient");
            for (const auto& k : dropped)
                if (k.slot == s)
                    throw std::domain_error("induced_on_quotient: omega slot quotient");
            out.slots.push_back(sl);
            std::size_t ns = out.slots.size() - 1;
            remap[{s, -1}] = {{{ns, -1}, 0}};  // marker: slot passes through
            continue;
        }
        for (long c = 0; c < sl.mult.count; ++c) {
            CoordKey k{s, c};
            if (dropped.count(k)) continue;
            auto it = killed.find(k);
            if (it == killed.end()) {
                out.slots.push_back({sl.atom, Multiplicity::finite(1)});
                remap[k] = {{{out.slots.size() - 1, 0}, 0}};
                continue;
            }
            // Coordinate becomes torsion Z/n (Localized) or Z(p^min) (Cyclic).
            Int n = it->second;
            if (sl.atom.kind == AtomKind::Cyclic) {
                long e = std::min<long>(valuation(n, sl.atom.p), sl.atom.e);
                out.slots.push_back({Atom::cyclic(sl.atom.p, e), Multiplicity::finite(1)});
                remap[k] = {{{out.slots.size() - 1, 0}, 0}};
            } else {
                for (const auto& p : factor(n)) {
                    out.slots.push_back(
                        {Atom::cyclic(p, valuation(n, p)), Multiplicity::finite(1)});
                    remap[k].push_back({{out.slots.size() - 1, 0}, pow_int(p, valuation(n, p))});
                }
            }
        }
    }

    // Map the endomorphism. Only block scalars and matrix entries between
    // surviving coordinates are supported.
    Endomorphism res;
    res.ambient = out;
    std::map<std::size_t, Rat> slot_scalar;
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        Rat sigma = phi.scalar_on(s);
        if (sigma == 0) continue;
        if (g.slots[s].mult.omega) {
            auto it = remap.find({s, -1});
            if (it != remap.end()) slot_scalar[it->second[0].first.slot] = sigma;
            continue;
        }
        for (long c = 0; c < g.slots[s].mult.count; ++c) {
            auto it = remap.find({s, c});
            if (it == remap.end()) continue;
            for (const auto& [nk, pp] : it->second) slot_scalar[nk.slot] = sigma;
        }
    }
    res.blocks = blocks_from_scalars(out.slots.size(), [&](std::size_t s) {
        auto it = slot_scalar.find(s);
        return it == slot_scalar.end() ? Rat(0) : it->second;
    });
    for (const auto& [key, val] : phi.matrix.entries) {
        auto is_ = remap.find(key.first);
        auto id = remap.find(key.second);
        if (is_ == remap.end() || id == remap.end()) {
            // Entries into dropped coordinates vanish; entries out of dropped
            // coordinates must have been zero on the quotient (invariance).
            continue;
        }
        for (const auto& [nsrc, pp1] : is_->second)
            for (const auto& [ndst, pp2] : id->second) res.matrix.entries[{nsrc, ndst}] += val;
    }
    if (!phi.finitary.empty())
        throw std::domain_error("induced_on_quotient: finitary parts unsupported");
    if (auto wd = is_well_defined(res); !wd)
        throw std::domain_error("induced_on_quotient: result ill-defined (" + wd.diagnostic +
                                ")");
    return res;
}

SubgroupHandle finitary_kernel_on_support(const Endomorphism& phi) {
    const GroupDescriptor& g = phi.ambient;
    std::set<CoordKey> coords;
    for (const auto& c : phi.finitary.contributions)
        for (const auto& [k, w] : c.weights)
            if (w != 0) coords.insert(k);
    SubgroupHandle h;
    h.label = "A0|support";
    if (coords.empty()) return h;
    std::vector<CoordKey> cols(coords.begin(), coords.end());
    std::size_t n = cols.size(), t = phi.finitary.contributions.size();
    // Solutions of W x ≡ 0 (mod m_k): x-part of the left kernel of [W^T; diag m].
    Mat m(n + t, t);
    for (std::size_t j = 0; j < t; ++j) {
        const auto& c = phi.finitary.contributions[j];
        for (std::size_t i = 0; i < n; ++i)
            m(i, j) = weight_term(g.slots[cols[i].slot].atom, c.weights.count(cols[i])
                                                                   ? c.weights.at(cols[i])
                                                                   : Rat(0),
                                  Rat(1), c.modulus);
        m(n + j, j) = phi.finitary.contributions[j].modulus;
    }
    Mat k = left_kernel(m);
    for (std::size_t i = 0; i < k.rows; ++i) {
        Element e;
        for (std::size_t j = 0; j < n; ++j)
            if (k(i, j) != 0) e.coords[cols[j]] = Rat(k(i, j));
        e = canonicalize(g, e);
        if (!e.is_zero()) h.generators.push_back(std::move(e));
    }
    return h;
}

}  // namespace inertia
