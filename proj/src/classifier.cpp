#include "inertia/classifier.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace inertia {

namespace {

Int abs_int(Int v) { return v < 0 ? -v : v; }

// Largest copy index of slot s touched by the matrix or finitary parts.
long max_touched(const Endomorphism& phi, std::size_t s) {
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

Rat diag_entry(const Endomorphism& phi, std::size_t s, long c) {
    auto it = phi.matrix.entries.find({CoordKey{s, c}, CoordKey{s, c}});
    return it == phi.matrix.entries.end() ? Rat(0) : it->second;
}

// Exact diagonal scalar of phi on coordinate (s, c): the block scalar plus a
// diagonal matrix entry (matrix entries only exist on finite-multiplicity
// slots).
Rat diag_scalar(const Endomorphism& phi, std::size_t s, long c) {
    return phi.scalar_on(s) + diag_entry(phi, s, c);
}

// Residue of a p-integral rational modulo p^e.
Int residue_mod(const Rat& r, const Int& pe) {
    Int n = num(r) % pe;
    if (n < 0) n += pe;
    if (den(r) == 1) return n;
    return n * inv_mod(den(r), pe) % pe;
}

// v_p(a - b), capped at `cap`; returns cap when a == b.
long diff_valuation(const Rat& a, const Rat& b, const Int& p, long cap) {
    Rat d = a - b;
    if (d == 0) return cap;
    long v = valuation(d, p);
    return std::min(v, cap);
}

NonInertialWitness manual_independence(const GroupDescriptor& g, const Endomorphism& phi,
                                       Element a) {
    NonInertialWitness w;
    w.kind = WitnessKind::Independence;
    w.mode = WitnessMode::RIN;
    w.ambient = g;
    w.generator = canonicalize(g, std::move(a));
    WitnessCheck c = verify_witness(w, phi, kDefaultWitnessK);
    if (!c.ok) throw std::logic_error("independence witness failed self-verification");
    w.verified_to = kDefaultWitnessK;
    return w;
}

// Section chain with the start index searched: finite deviations shift the
// index at which the claimed growth kicks in.
NonInertialWitness try_chain(const GroupDescriptor& g, const Int& p,
                             std::vector<NonInertialWitness::ChainTerm> terms,
                             const Int& factor, const Endomorphism& phi) {
    for (long start = 0; start <= 24; ++start) {
        try {
            return section_chain_witness(g, p, terms, start, factor, phi);
        } catch (const std::logic_error&) {
            // growth not yet reached at this offset; try the next
        }
    }
    throw std::logic_error("section chain witness: no verifiable start offset");
}

// ---------------------------------------------------------------------------
// Blockwise reduction
// ---------------------------------------------------------------------------

struct Analysis {
    bool blockwise = false;
    std::vector<Rat> scalar;  // per-slot diagonal scalar
    std::optional<NonInertialWitness> witness;
};

// Witness for an endomorphism whose deviation from the blockwise part has
// infinite image: locate a free independent direction or a divergent
// quasi-cyclic direction among the matrix entries.
NonInertialWitness deviation_witness(const Endomorphism& phi) {
    const GroupDescriptor& g = phi.ambient;

    // Off-diagonal entries with infinite reach.
    std::vector<std::pair<CoordKey, Rat>> loc_diags;
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        const Slot& sl = g.slots[s];
        long copies = sl.mult.omega ? max_touched(phi, s) + 2 : sl.mult.count;
        for (long c = 0; c < copies; ++c) {
            Element img = apply(phi, unit_element(g, {s, c}));
            for (const auto& [k, val] : img.coords) {
                if (val == 0 || (k.slot == s && k.copy == c)) continue;
                const Atom& dst = g.slots[k.slot].atom;
                if (dst.kind == AtomKind::Localized && sl.atom.kind == AtomKind::Localized)
                    return manual_independence(g, phi, unit_element(g, {s, c}));
                if (dst.kind == AtomKind::Prufer &&
                    ((sl.atom.kind == AtomKind::Localized && sl.atom.pi.contains(dst.p)) ||
                     (sl.atom.kind == AtomKind::Prufer && sl.atom.p == dst.p)))
                    return try_chain(g, dst.p, {{s, c, 0, true, 0}}, dst.p, phi);
            }
            if (sl.atom.kind == AtomKind::Localized)
                loc_diags.push_back({CoordKey{s, c}, diag_scalar(phi, s, c)});
            if (sl.atom.kind == AtomKind::Prufer && c > 0 &&
                diag_scalar(phi, s, c) != diag_scalar(phi, s, 0))
                return try_chain(g, sl.atom.p, {{s, 0, 0, true, 0}, {s, c, 0, true, 0}},
                                 sl.atom.p, phi);
        }
    }
    // Diverging diagonal scalars on two free coordinates.
    for (std::size_t i = 0; i < loc_diags.size(); ++i)
        for (std::size_t j = i + 1; j < loc_diags.size(); ++j)
            if (loc_diags[i].second != loc_diags[j].second) {
                Element a = elem_add(g, unit_element(g, loc_diags[i].first),
                                     unit_element(g, loc_diags[j].first));
                return manual_independence(g, phi, std::move(a));
            }
    throw std::logic_error("deviation witness search exhausted on an infinite deviation");
}

Analysis analyze_blockwise(const Endomorphism& phi) {
    const GroupDescriptor& g = phi.ambient;
    Analysis a;
    a.scalar.resize(g.slots.size());
    Endomorphism blocks = zero_endo(g);
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        a.scalar[s] = g.slots[s].mult.omega ? phi.scalar_on(s) : diag_scalar(phi, s, 0);
        blocks.blocks.push_back({{s}, Scalar(a.scalar[s])});
    }
    SectionSize dev = image_finite(add(phi, negate(blocks)));
    a.blockwise = dev.kind == SectionSize::Finite;
    if (!a.blockwise) a.witness = deviation_witness(phi);
    return a;
}

// ---------------------------------------------------------------------------
// Per-prime slot inventory
// ---------------------------------------------------------------------------

struct PrimeInfo {
    std::vector<std::size_t> cyc_omega;        // ω-multiplicity Cyclic(p) slots
    std::vector<std::size_t> pruf;             // all Prufer(p) slots
    std::optional<std::size_t> pruf_omega;     // an ω-multiplicity one
    std::optional<std::size_t> loc_with_p;     // a Localized slot with p ∈ π_s
};

std::map<Int, PrimeInfo> prime_map(const GroupDescriptor& g, const std::vector<Int>& extra) {
    std::map<Int, PrimeInfo> out;
    for (const auto& p : g.torsion_primes()) out[p];
    for (const auto& p : extra) out[p];
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        const Slot& sl = g.slots[s];
        switch (sl.atom.kind) {
            case AtomKind::Cyclic:
                if (sl.mult.omega) out[sl.atom.p].cyc_omega.push_back(s);
                break;
            case AtomKind::Prufer:
                out[sl.atom.p].pruf.push_back(s);
                if (sl.mult.omega && !out[sl.atom.p].pruf_omega) out[sl.atom.p].pruf_omega = s;
                break;
            case AtomKind::Localized:
                for (auto& [p, info] : out)
                    if (!info.loc_with_p && sl.atom.pi.contains(p)) info.loc_with_p = s;
                break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scalar rules for a single blockwise endomorphism
// ---------------------------------------------------------------------------

struct SingleResult {
    bool rin = true;
    bool lin = true;
    std::optional<NonInertialWitness> witness;
    bool has_loc = false;
    Rat mn;  // the torsion-free scalar (0 for periodic ambients)
};

SingleResult classify_single(const GroupDescriptor& g, const Analysis& an,
                             const Endomorphism& phi) {
    SingleResult out;
    const std::vector<Rat>& sc = an.scalar;

    std::vector<std::size_t> locs;
    for (std::size_t s = 0; s < g.slots.size(); ++s)
        if (g.slots[s].atom.kind == AtomKind::Localized) locs.push_back(s);
    out.has_loc = !locs.empty();

    if (g.is_finite()) return out;  // everything holds trivially

    if (out.has_loc) {
        out.mn = sc[locs[0]];
        for (std::size_t i = 1; i < locs.size(); ++i)
            if (sc[locs[i]] != out.mn) {
                out.rin = out.lin = false;
                Element a = elem_add(g, unit_element(g, {locs[0], 0}),
                                     unit_element(g, {locs[i], 0}));
                out.witness = manual_independence(g, phi, std::move(a));
                return out;
            }
    }
    Int m = num(out.mn), n = den(out.mn);
    PrimeSet pi = out.has_loc ? PrimeSet::of_integer(n) : PrimeSet();
    bool r0_omega = g.r0().omega;

    std::vector<Int> extra;
    if (m != 0)
        for (const auto& p : factor(m)) extra.push_back(p);
    for (const auto& p : factor(n)) extra.push_back(p);
    std::map<Int, PrimeInfo> info = prime_map(g, extra);

    auto base_of = [&](std::size_t s) { return max_touched(phi, s) + 1; };

    // ---- RIN ----
    if (out.has_loc && r0_omega) {
        // Infinite free rank: only integer multiplications on a finite-index
        // subgroup are inertial.
        std::size_t locw = 0;
        for (std::size_t s : locs)
            if (g.slots[s].mult.omega) { locw = s; break; }
        if (n != 1) {
            out.rin = false;
            out.witness = free_rank_witness(g, out.mn);
        } else {
            for (const auto& [p, I] : info) {
                if (!out.rin) break;
                for (std::size_t s : I.cyc_omega) {
                    long e = g.slots[s].atom.e;
                    long v = diff_valuation(sc[s], out.mn, p, e);
                    if (v < e) {
                        out.rin = false;
                        out.witness = try_chain(
                            g, p,
                            {{s, base_of(s), 1, false, 0}, {locw, base_of(locw), 1, false, 0}},
                            pow_int(p, e - v), phi);
                        break;
                    }
                }
                if (!out.rin) break;
                for (std::size_t s : I.pruf)
                    if (sc[s] != out.mn) {
                        out.rin = false;
                        out.witness = try_chain(
                            g, p, {{s, 0, 0, true, 0}, {locw, base_of(locw), 1, false, 0}}, p,
                            phi);
                        break;
                    }
            }
        }
    } else {
        // Finite free rank (possibly periodic). An unbounded p-component is
        // forbidden for p | n.
        if (out.has_loc)
            for (const auto& p : pi.primes()) {
                auto it = info.find(p);
                if (it != info.end() && !it->second.pruf.empty()) {
                    out.rin = false;
                    std::size_t s = it->second.pruf.front();
                    out.witness = diagonal_witness(g, p, Scalar(sc[s], p), out.mn);
                    break;
                }
            }
        for (const auto& [p, I] : info) {
            if (!out.rin) break;
            // (1) a single multiplication must act on the bounded ω-part.
            for (std::size_t i = 0; i + 1 < I.cyc_omega.size() && out.rin; ++i)
                for (std::size_t j = i + 1; j < I.cyc_omega.size(); ++j) {
                    std::size_t si = I.cyc_omega[i], sj = I.cyc_omega[j];
                    long emin = std::min(g.slots[si].atom.e, g.slots[sj].atom.e);
                    long v = diff_valuation(sc[si], sc[sj], p, emin);
                    if (v < emin) {
                        out.rin = false;
                        out.witness = try_chain(
                            g, p, {{si, base_of(si), 1, false, 0}, {sj, base_of(sj), 1, false, 0}},
                            pow_int(p, emin - v), phi);
                        break;
                    }
                }
            if (!out.rin || pi.contains(p)) continue;
            // (2) one p-adic scalar on all divisible p-parts.
            for (std::size_t i = 0; i + 1 < I.pruf.size() && out.rin; ++i)
                for (std::size_t j = i + 1; j < I.pruf.size(); ++j)
                    if (sc[I.pruf[i]] != sc[I.pruf[j]]) {
                        out.rin = false;
                        out.witness = try_chain(
                            g, p, {{I.pruf[i], 0, 0, true, 0}, {I.pruf[j], 0, 0, true, 0}}, p,
                            phi);
                        break;
                    }
            if (!out.rin) break;
            // (3) ω-rank divisible p-parts pin the scalar on the bounded ω-part.
            if (I.pruf_omega)
                for (std::size_t s : I.cyc_omega) {
                    long e = g.slots[s].atom.e;
                    long v = diff_valuation(sc[s], sc[*I.pruf_omega], p, e);
                    if (v < e) {
                        out.rin = false;
                        std::size_t sp = *I.pruf_omega;
                        out.witness = try_chain(
                            g, p, {{s, base_of(s), 1, false, 0}, {sp, base_of(sp), 1, false, e}},
                            pow_int(p, e - v), phi);
                        break;
                    }
                }
            if (!out.rin) break;
            // (4) infinite p-part of C/V forces the fraction on divisible parts.
            if (out.has_loc && I.loc_with_p)
                for (std::size_t s : I.pruf)
                    if (sc[s] != out.mn) {
                        out.rin = false;
                        out.witness = try_chain(
                            g, p, {{s, 0, 0, true, 0}, {*I.loc_with_p, 0, 0, true, 0}}, p, phi);
                        break;
                    }
        }
    }

    // ---- LIN ----
    if (out.has_loc) {
        if (m == 0) {
            out.lin = false;
        } else if (r0_omega) {
            out.lin = abs_int(m) == 1;
            for (const auto& [p, I] : info) {
                if (!out.lin) break;
                if (n % p == 0) {
                    out.lin = I.cyc_omega.empty() && I.pruf.empty();
                    continue;
                }
                for (std::size_t s : I.cyc_omega)
                    if (diff_valuation(sc[s], out.mn, p, g.slots[s].atom.e) < g.slots[s].atom.e)
                        out.lin = false;
                for (std::size_t s : I.pruf)
                    if (sc[s] != out.mn) out.lin = false;
            }
        } else {
            out.lin = out.rin;  // LIN requires RIN at finite torsion-free rank
            for (const auto& [p, I] : info) {
                if (!out.lin) break;
                std::vector<std::size_t> tor(I.cyc_omega.begin(), I.cyc_omega.end());
                tor.insert(tor.end(), I.pruf.begin(), I.pruf.end());
                if (tor.empty()) continue;
                bool all_mn = true;
                for (std::size_t s : tor)
                    if (sc[s] != out.mn) all_mn = false;
                if (all_mn) {
                    // Multiplication-like at p: a non-unit scalar needs the
                    // minimal condition on the p-part (componentwise (L2)).
                    bool min_p = I.cyc_omega.empty() && !I.pruf_omega;
                    if (valuation(out.mn, p) > 0 && !min_p) out.lin = false;
                } else {
                    // Deviating scalars at p: the action on the p-torsion
                    // must be invertible, and a p-divisible free part pins
                    // every quasi-cyclic scalar to mn (dual quotient rule).
                    for (std::size_t s : tor)
                        if (sc[s] == 0 || valuation(sc[s], p) != 0) out.lin = false;
                    if (I.loc_with_p)
                        for (std::size_t s : I.pruf)
                            if (sc[s] != out.mn) out.lin = false;
                }
            }
        }
    } else {
        out.lin = out.rin;
        for (const auto& [p, I] : info) {
            if (!out.lin) break;
            if (I.cyc_omega.empty() && I.pruf.empty()) continue;  // finite p-part
            bool invertible = true;
            for (std::size_t s : I.cyc_omega)
                if (sc[s] == 0 || valuation(sc[s], p) != 0) invertible = false;
            for (std::size_t s : I.pruf)
                if (sc[s] == 0 || valuation(sc[s], p) != 0) invertible = false;
            if (invertible) continue;
            bool min_p = I.cyc_omega.empty() && !I.pruf_omega;
            bool nonzero = true;
            for (std::size_t s : I.pruf)
                if (sc[s] == 0) nonzero = false;
            if (!(min_p && nonzero)) out.lin = false;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Certificate construction
// ---------------------------------------------------------------------------

Int drop_index_bound(const GroupDescriptor& g, const std::vector<Endomorphism>& phis) {
    Int ib = 1;
    for (const auto& sl : g.slots)
        if (sl.atom.kind == AtomKind::Cyclic && !sl.mult.omega)
            ib *= pow_int(sl.atom.order(), sl.mult.count);
    for (const auto& phi : phis)
        for (const auto& c : phi.finitary.contributions) ib *= c.modulus;
    return ib;
}

// The integer m with phi = m on a finite-index subgroup, when one exists.
std::optional<Int> case_a_integer(const GroupDescriptor& g, const Analysis& an,
                                  const SingleResult& res) {
    std::optional<Rat> exact;
    if (res.has_loc) {
        if (den(res.mn) != 1) return std::nullopt;
        exact = res.mn;
    }
    for (std::size_t s = 0; s < g.slots.size(); ++s)
        if (g.slots[s].atom.kind == AtomKind::Prufer) {
            if (exact && an.scalar[s] != *exact) return std::nullopt;
            exact = an.scalar[s];
        }
    if (exact && den(*exact) != 1) return std::nullopt;

    // Congruences from the ω-multiplicity cyclic slots, combined per prime
    // then by CRT across primes.
    std::map<Int, std::pair<Int, long>> per_prime;  // p -> (residue, exponent)
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        const Slot& sl = g.slots[s];
        if (sl.atom.kind != AtomKind::Cyclic || !sl.mult.omega) continue;
        Int p = sl.atom.p;
        long e = sl.atom.e;
        Int r = residue_mod(an.scalar[s], pow_int(p, e));
        auto it = per_prime.find(p);
        if (it == per_prime.end()) {
            per_prime[p] = {r, e};
            continue;
        }
        long emin = std::min(e, it->second.second);
        if ((r - it->second.first) % pow_int(p, emin) != 0) return std::nullopt;
        if (e > it->second.second) it->second = {r, e};
    }
    if (exact) {
        Int m = num(*exact);
        for (const auto& [p, re] : per_prime)
            if ((m - re.first) % pow_int(p, re.second) != 0) return std::nullopt;
        return m;
    }
    if (per_prime.empty()) {
        // Unconstrained (e.g. finite ambient): prefer the uniform scalar when
        // the endomorphism already is an integer multiplication.
        bool uniform = true;
        for (std::size_t s = 1; s < an.scalar.size(); ++s)
            if (an.scalar[s] != an.scalar[0]) uniform = false;
        if (uniform && !an.scalar.empty() && den(an.scalar[0]) == 1) return num(an.scalar[0]);
        return Int(0);
    }
    Int modulus = 1, x = 0;
    for (const auto& [p, re] : per_prime) {
        Int pe = pow_int(p, re.second);
        // x' ≡ x (mod modulus), x' ≡ re.first (mod pe)
        Int t = (re.first - x) % pe;
        if (t < 0) t += pe;
        x += modulus * (t * inv_mod(modulus % pe, pe) % pe);
        modulus *= pe;
    }
    if (modulus > 1 && x > modulus / 2) x -= modulus;  // balanced representative
    return x;
}

// True when the p-slots can live inside C with a single per-prime scalar for
// every member of the family.
bool c_viable(const GroupDescriptor& g, const Int& p, const PrimeInfo& I, const PrimeSet& pi,
              const std::vector<Analysis>& ans, const std::vector<SingleResult>& ress) {
    bool quotient_p = I.loc_with_p && !pi.contains(p);
    for (std::size_t i = 0; i < ans.size(); ++i) {
        const auto& sc = ans[i].scalar;
        std::optional<Rat> exact;
        if (quotient_p) exact = ress[i].mn;
        for (std::size_t s : I.pruf) {
            if (exact && sc[s] != *exact) return false;
            exact = sc[s];
        }
        if (exact) {
            for (std::size_t s : I.cyc_omega) {
                long e = g.slots[s].atom.e;
                if (diff_valuation(sc[s], *exact, p, e) < e) return false;
            }
        }
        // cyc-only: pairwise compatibility was already enforced by rule (1).
    }
    return true;
}

InertialCertificate build_certificate(const GroupDescriptor& g,
                                      const std::vector<Endomorphism>& phis,
                                      const std::vector<Analysis>& ans,
                                      const std::vector<SingleResult>& ress) {
    InertialCertificate cert;
    cert.index_bound = drop_index_bound(g, phis);

    // CaseA first: it realizes the minimal prime set π = ∅.
    bool case_a = true;
    std::vector<Int> ms;
    for (std::size_t i = 0; i < phis.size() && case_a; ++i) {
        auto m = case_a_integer(g, ans[i], ress[i]);
        if (!m)
            case_a = false;
        else
            ms.push_back(*m);
    }
    if (case_a) {
        cert.kind = InertialCertificate::Kind::CaseA;
        cert.m = std::move(ms);
        cert.a0_description =
            "complement of the finite cyclic slots, intersected with the finitary kernels";
        return cert;
    }

    cert.kind = InertialCertificate::Kind::CaseB;
    cert.a0_description =
        "B + D + C over the non-finite slots, dropping the finite cyclic slots";
    PrimeSet pi;
    for (const auto& r : ress)
        if (r.has_loc) pi = pi.unite(PrimeSet::of_integer(den(r.mn)));
    cert.pi = pi;

    std::map<Int, PrimeInfo> info = prime_map(g, {});
    std::set<Int> pi1 = pi.primes();
    for (const auto& [p, I] : info) {
        if (I.cyc_omega.empty() && I.pruf.empty()) continue;
        if (pi.contains(p)) continue;
        if (!c_viable(g, p, I, pi, ans, ress)) pi1.insert(p);
    }
    cert.pi1 = PrimeSet(pi1);

    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        const Slot& sl = g.slots[s];
        switch (sl.atom.kind) {
            case AtomKind::Cyclic:
                if (!sl.mult.omega) break;  // dropped into the index bound
                if (cert.pi1.contains(sl.atom.p))
                    cert.b_slots.push_back(s);
                else
                    cert.c_slots.push_back(s);
                break;
            case AtomKind::Prufer:
                if (cert.pi1.contains(sl.atom.p))
                    cert.d_slots.push_back(s);
                else
                    cert.c_slots.push_back(s);
                break;
            case AtomKind::Localized: {
                cert.c_slots.push_back(s);
                if (sl.mult.omega)
                    throw std::logic_error("CaseB certificate with infinite free rank");
                for (long c = 0; c < sl.mult.count; ++c) {
                    cert.v.generators.push_back(unit_element(g, {s, c}));
                    ++cert.rank_v;
                }
                if (!pi.empty()) cert.v.divisibleClosure[s] = pi;
                break;
            }
        }
    }
    cert.v.label = "V";

    for (std::size_t i = 0; i < phis.size(); ++i) {
        InertialCertificate::EndoScalars es;
        es.mn = ress[i].mn;
        es.on_v = ress[i].mn;
        for (std::size_t s : cert.b_slots) es.on_b[s] = ans[i].scalar[s];
        for (std::size_t s : cert.d_slots) es.on_d[s] = ans[i].scalar[s];
        for (std::size_t s : cert.c_slots)
            es.on_c[s] = g.slots[s].atom.kind == AtomKind::Localized ? ress[i].mn
                                                                     : ans[i].scalar[s];
        cert.scalars.push_back(std::move(es));
    }
    return cert;
}

void check_ambient(const std::vector<Endomorphism>& phis, const GroupDescriptor& a) {
    for (const auto& phi : phis) {
        if (!(phi.ambient == a))
            throw std::invalid_argument("classifier: endomorphism ambient mismatch");
        WellDefined wd = is_well_defined(phi);
        if (!wd) throw std::invalid_argument("classifier: ill-defined endomorphism: " +
                                             wd.diagnostic);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Certificate re-validation
// ---------------------------------------------------------------------------

std::string validate_certificate(const InertialCertificate& cert,
                                 const std::vector<Endomorphism>& phis,
                                 const GroupDescriptor& a) {
    using Kind = InertialCertificate::Kind;
    if (cert.kind == Kind::CaseA) {
        if (cert.m.size() != phis.size()) return "CaseA: one integer per endomorphism required";
        for (std::size_t i = 0; i < phis.size(); ++i) {
            Endomorphism mu = multiplication(a, Rat(cert.m[i]));
            SectionSize dev = image_finite(add(phis[i], negate(mu)));
            if (dev.kind != SectionSize::Finite)
                return "CaseA: phi - m_" + std::to_string(i) + " has infinite image";
        }
        return "";
    }

    if (cert.pi.is_all() || cert.pi1.is_all()) return "CaseB: prime sets must be finite";
    if (!cert.pi.subset_of(cert.pi1)) return "CaseB: pi must be contained in pi1";
    if (cert.scalars.size() != phis.size()) return "CaseB: one scalar record per endomorphism";

    // Slot partition.
    std::vector<int> role(a.slots.size(), -1);
    auto assign = [&](const std::vector<std::size_t>& slots, int r) -> bool {
        for (std::size_t s : slots) {
            if (s >= role.size() || role[s] != -1) return false;
            role[s] = r;
        }
        return true;
    };
    if (!assign(cert.b_slots, 0) || !assign(cert.d_slots, 1) || !assign(cert.c_slots, 2))
        return "CaseB: slot sets overlap or are out of range";
    long loc_copies = 0;
    for (std::size_t s = 0; s < a.slots.size(); ++s) {
        const Slot& sl = a.slots[s];
        if (sl.atom.kind == AtomKind::Cyclic && !sl.mult.omega) {
            if (role[s] != -1) return "CaseB: finite cyclic slots belong to the index bound";
            continue;
        }
        switch (role[s]) {
            case -1:
                return "CaseB: slot " + std::to_string(s) + " not covered by B, D or C";
            case 0:
                if (sl.atom.kind != AtomKind::Cyclic) return "(i): B must be bounded";
                if (!cert.pi1.contains(sl.atom.p)) return "(i): B outside the pi1-component";
                break;
            case 1:
                if (sl.atom.kind != AtomKind::Prufer || sl.mult.omega)
                    return "(i): D must be divisible with finite rank";
                if (!cert.pi1.contains(sl.atom.p)) return "(i): D outside the pi1-component";
                if (cert.pi.contains(sl.atom.p)) return "(i): D must be a pi'-group";
                break;
            case 2:
                if (sl.atom.is_torsion() && cert.pi1.contains(sl.atom.p))
                    return "(i): pi1-torsion must lie in B + D";
                if (sl.atom.kind == AtomKind::Localized) {
                    if (!cert.pi.subset_of(sl.atom.pi))
                        return "(ii): V requires pi-divisibility of the free slots";
                    if (sl.mult.omega) return "(ii): V must have finite rank";
                    loc_copies += sl.mult.count;
                }
                break;
        }
    }

    // V: full free rank, one unit generator per free coordinate, closure pi.
    if ((long)cert.v.generators.size() != cert.rank_v) return "(ii): V rank mismatch";
    if (cert.rank_v != loc_copies) return "(ii): A/V must be periodic (V of full rank)";
    for (const auto& gen : cert.v.generators) {
        if (gen.coords.size() != 1) return "(ii): V generators must be single coordinates";
        const auto& k = gen.coords.begin()->first;
        if (role[k.slot] != 2 || a.slots[k.slot].atom.kind != AtomKind::Localized)
            return "(ii): V generators must lie on the free part of C";
        if (!cert.pi.empty()) {
            auto it = cert.v.divisibleClosure.find(k.slot);
            if (it == cert.v.divisibleClosure.end() || !(it->second == cert.pi))
                return "(ii): V generators must carry closure pi";
        }
    }

    Int nprod = 1;
    for (std::size_t i = 0; i < phis.size(); ++i) {
        const Endomorphism& phi = phis[i];
        const auto& es = cert.scalars[i];
        if (es.on_v != es.mn) return "(iv): scalar on V must be m/n";
        nprod *= den(es.mn);
        for (const auto& gen : cert.v.generators)
            if (!(apply(phi, gen) == elem_scale(a, es.mn, gen)))
                return "(ii)/(iii): V is not invariant under multiplication by m/n";

        Int nf = 1;
        for (const auto& c : phi.finitary.contributions) nf *= c.modulus;

        // (iii): the recorded scalars act on probe elements of every kept slot.
        for (std::size_t s = 0; s < a.slots.size(); ++s) {
            if (role[s] == -1) continue;
            const Slot& sl = a.slots[s];
            const std::map<std::size_t, Rat>& rec =
                role[s] == 0 ? es.on_b : (role[s] == 1 ? es.on_d : es.on_c);
            auto it = rec.find(s);
            if (it == rec.end()) return "(iii): missing scalar record for slot " +
                                        std::to_string(s);
            const Rat& r = it->second;
            long c0 = sl.mult.omega ? max_touched(phi, s) + 1 : 0;
            long c1 = sl.mult.omega ? c0 + 1 : sl.mult.count;
            for (long c = c0; c < c1; ++c) {
                if (sl.atom.kind == AtomKind::Prufer) {
                    for (long k = 1; k <= 10; ++k) {
                        Element x;
                        x.coords[{s, c}] = Rat(nf, pow_int(sl.atom.p, k));
                        x = canonicalize(a, std::move(x));
                        if (!(apply(phi, x) == elem_scale(a, r, x)))
                            return "(iii): recorded scalar disagrees on slot " +
                                   std::to_string(s);
                    }
                } else {
                    Element x = elem_scale(a, Rat(nf), unit_element(a, {s, c}));
                    if (!(apply(phi, x) == elem_scale(a, r, x)))
                        return "(iii): recorded scalar disagrees on slot " + std::to_string(s);
                }
            }
        }

        // (iii)/(iv): single multiplication per prime on B, D and C/V, and the
        // fraction on D when C/V has an infinite p-component.
        std::set<Int> primes;
        for (std::size_t s = 0; s < a.slots.size(); ++s)
            if (role[s] != -1 && a.slots[s].atom.is_torsion()) primes.insert(a.slots[s].atom.p);
        for (const auto& p : primes) {
            std::vector<std::size_t> bp, dp, cp_cyc, cp_pruf;
            bool quotient_p = false;
            for (std::size_t s = 0; s < a.slots.size(); ++s) {
                if (role[s] == -1) continue;
                const Atom& at = a.slots[s].atom;
                if (at.kind == AtomKind::Localized) {
                    if (at.pi.contains(p) && !cert.pi.contains(p)) quotient_p = true;
                    continue;
                }
                if (at.p != p) continue;
                if (role[s] == 0) bp.push_back(s);
                if (role[s] == 1) dp.push_back(s);
                if (role[s] == 2)
                    (at.kind == AtomKind::Cyclic ? cp_cyc : cp_pruf).push_back(s);
            }
            for (std::size_t x = 0; x + 1 < bp.size(); ++x)
                for (std::size_t y = x + 1; y < bp.size(); ++y) {
                    long emin = std::min(a.slots[bp[x]].atom.e, a.slots[bp[y]].atom.e);
                    if (diff_valuation(es.on_b.at(bp[x]), es.on_b.at(bp[y]), p, emin) < emin)
                        return "(iii): B does not carry a single multiplication at " + p.str();
                }
            for (std::size_t x = 0; x + 1 < dp.size(); ++x)
                if (es.on_d.at(dp[x]) != es.on_d.at(dp[x + 1]))
                    return "(iii): D does not carry a single multiplication at " + p.str();
            std::optional<Rat> cexact;
            if (quotient_p) cexact = es.mn;
            for (std::size_t s : cp_pruf) {
                if (cexact && es.on_c.at(s) != *cexact)
                    return "(iii): C/V does not carry a single multiplication at " + p.str();
                cexact = es.on_c.at(s);
            }
            if (cexact)
                for (std::size_t s : cp_cyc) {
                    long e = a.slots[s].atom.e;
                    if (diff_valuation(es.on_c.at(s), *cexact, p, e) < e)
                        return "(iii): C/V does not carry a single multiplication at " + p.str();
                }
            for (std::size_t x = 0; x + 1 < cp_cyc.size(); ++x)
                for (std::size_t y = x + 1; y < cp_cyc.size(); ++y) {
                    long emin = std::min(a.slots[cp_cyc[x]].atom.e, a.slots[cp_cyc[y]].atom.e);
                    if (diff_valuation(es.on_c.at(cp_cyc[x]), es.on_c.at(cp_cyc[y]), p, emin) <
                        emin)
                        return "(iii): C/V does not carry a single multiplication at " + p.str();
                }
            bool cv_infinite = quotient_p || !cp_pruf.empty();
            if (cv_infinite)
                for (std::size_t s : dp)
                    if (es.on_d.at(s) != es.mn)
                        return "(iv): D scalar must be m/n at " + p.str();
        }
    }
    if (!(PrimeSet::of_integer(nprod) == cert.pi)) return "(iv): pi must equal pi(n_1...n_t)";
    return "";
}

// ---------------------------------------------------------------------------
// Decision procedures
// ---------------------------------------------------------------------------

Verdict classify_general(const std::vector<Endomorphism>& phis, const GroupDescriptor& a) {
    check_ambient(phis, a);
    Verdict v;
    if (a.trivial()) {
        v.rin = v.lin = true;
        InertialCertificate cert;
        cert.kind = InertialCertificate::Kind::CaseA;
        cert.m.assign(phis.size(), Int(0));
        cert.a0_description = "the trivial group";
        v.certificate = std::move(cert);
        return v;
    }

    std::vector<Analysis> ans;
    std::vector<SingleResult> ress;
    v.rin = v.lin = true;
    for (const auto& phi : phis) {
        Analysis an = analyze_blockwise(phi);
        if (!an.blockwise) {
            // An infinite non-multiplication deviation falsifies both
            // conditions on the supported class.
            v.rin = v.lin = false;
            if (!v.witness) v.witness = an.witness;
            ans.push_back(std::move(an));
            ress.emplace_back();
            continue;
        }
        SingleResult res = classify_single(a, an, phi);
        v.rin = v.rin && res.rin;
        v.lin = v.lin && res.lin;
        if (!res.rin && !v.witness) v.witness = res.witness;
        ans.push_back(std::move(an));
        ress.push_back(std::move(res));
    }

    if (v.rin) {
        InertialCertificate cert = build_certificate(a, phis, ans, ress);
        std::string err = validate_certificate(cert, phis, a);
        if (!err.empty())
            throw std::logic_error("certificate failed re-validation: " + err);
        v.certificate = std::move(cert);
    }
    return v;
}

Verdict classify_periodic(const std::vector<Endomorphism>& phis, const GroupDescriptor& a) {
    if (!a.is_periodic())
        throw std::invalid_argument("classify_periodic: ambient must be periodic");
    return classify_general(phis, a);
}

Verdict classify_torsion_free(const Endomorphism& phi, const GroupDescriptor& a) {
    if (!a.is_torsion_free())
        throw std::invalid_argument("classify_torsion_free: torsion slots present");
    return classify_general({phi}, a);
}

Verdict classify_multiplication(const Scalar& s, const GroupDescriptor& a) {
    Endomorphism mu;
    try {
        mu = multiplication(a, s.value);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("classify_multiplication: ") + e.what());
    }
    WellDefined wd = is_well_defined(mu);
    if (!wd)
        throw std::invalid_argument("classify_multiplication: ill-defined scalar: " +
                                    wd.diagnostic);

    Verdict v;
    Int m = num(s.value), n = den(s.value);
    if (a.trivial() || a.is_finite()) {
        v.rin = v.lin = true;
    } else {
        Multiplicity r0 = a.r0();
        v.rin = !r0.omega || n == 1;  // (R): FTFR or an integer multiplication
        if (a.is_periodic()) {
            v.lin = true;  // (L1) componentwise
            for (const auto& p : a.torsion_primes()) {
                GroupDescriptor ap = component(a, PrimeSet({p}));
                if (ap.is_finite()) continue;
                bool invertible = m != 0 && valuation(m, p) == 0;
                if (!(invertible || (ap.has_min() && m != 0))) v.lin = false;
            }
        } else if (!r0.omega) {
            // (L2)
            v.lin = m != 0 && component(a, PrimeSet::of_integer(m)).has_min();
        } else {
            v.lin = abs_int(m) == 1;  // (L3): phi = 1/n
        }
    }

    // Certificate / witness via the general engine, which must agree.
    Verdict engine = classify_general({mu}, a);
    if (engine.rin != v.rin || engine.lin != v.lin)
        throw std::logic_error("classify_multiplication: closed-form rules disagree with the "
                               "general procedure");
    v.certificate = engine.certificate;
    v.witness = engine.witness;
    return v;
}

// ---------------------------------------------------------------------------
// Supporting operations
// ---------------------------------------------------------------------------

SubgroupHandle common_V(const std::vector<Endomorphism>& phis, const GroupDescriptor& a) {
    if (a.r0().omega)
        throw std::invalid_argument("common_V: ambient must have finite torsion-free rank");
    check_ambient(phis, a);

    std::vector<std::pair<std::size_t, long>> free_coords;
    for (std::size_t s = 0; s < a.slots.size(); ++s)
        if (a.slots[s].atom.kind == AtomKind::Localized)
            for (long c = 0; c < a.slots[s].mult.count; ++c) free_coords.push_back({s, c});

    PrimeSet pi;
    for (const auto& phi : phis)
        for (const auto& [s, c] : free_coords) {
            Element e = unit_element(a, {s, c});
            Element img = apply(phi, e);
            Rat r = img.at({s, c});
            if (!(img == elem_scale(a, r, e)))
                throw std::domain_error(
                    "common_V: no such V within search budget: the free generator (" +
                    std::to_string(s) + "," + std::to_string(c) +
                    ") is not scalar under an endomorphism of the family");
            pi = pi.unite(PrimeSet::of_integer(den(r)));
        }
    for (const auto& [s, c] : free_coords)
        if (!pi.subset_of(a.slots[s].atom.pi))
            throw std::domain_error("common_V: no such V within search budget: slot " +
                                    std::to_string(s) + " is not pi-divisible");

    SubgroupHandle v;
    v.label = "V";
    for (const auto& [s, c] : free_coords) {
        v.generators.push_back(unit_element(a, {s, c}));
        if (!pi.empty()) v.divisibleClosure[s] = pi;
    }
    return v;
}

MfFmDecomposition convert_mf_fm(const Endomorphism& phi, MfFmDirection direction) {
    (void)direction;  // both representations are produced and verified
    const GroupDescriptor& g = phi.ambient;
    if (!g.is_periodic())
        throw std::invalid_argument("convert_mf_fm: ambient must be periodic");
    WellDefined wd = is_well_defined(phi);
    if (!wd) throw std::invalid_argument("convert_mf_fm: ill-defined input");

    MfFmDecomposition out;
    out.mult = zero_endo(g);
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        Rat r = g.slots[s].mult.omega ? phi.scalar_on(s) : diag_scalar(phi, s, 0);
        out.mult.blocks.push_back({{s}, Scalar(r)});
    }
    out.finite_part = add(phi, negate(out.mult));
    out.image_size = image_finite(out.finite_part);
    if (out.image_size.kind != SectionSize::Finite)
        throw std::domain_error("convert_mf_fm: phi admits neither form");

    // |A/A0| bound: the deviation vanishes on the multiples killing its
    // matrix sources and finitary residues.
    Int ib = 1;
    std::set<CoordKey> sources;
    for (const auto& [key, val] : phi.matrix.entries)
        if (val != 0) sources.insert(key.first);
    for (const auto& k : sources) ib *= g.slots[k.slot].atom.order();
    for (const auto& c : phi.finitary.contributions) ib *= c.modulus;
    out.index_bound = ib;
    return out;
}

Verdict lift_finite_index(const Verdict& v, const Int& index) {
    if (index <= 0) throw std::invalid_argument("lift_finite_index: index not finite");
    Verdict out = v;
    if (out.certificate) {
        out.certificate->index_bound *= index;
        out.certificate->a0_description += "; lifted across a subgroup/quotient of index " +
                                           index.str();
    }
    return out;
}

std::pair<bool, SectionSize> commutator_check(const Endomorphism& phi,
                                              const Endomorphism& psi) {
    if (!(phi.ambient == psi.ambient))
        throw std::invalid_argument("commutator_check: ambient mismatch");
    if (!classify_general({phi}, phi.ambient).rin ||
        !classify_general({psi}, psi.ambient).rin)
        throw std::invalid_argument("commutator_check: inputs not both inertial");
    Endomorphism k = add(compose(phi, psi), negate(compose(psi, phi)));
    SectionSize s = image_finite(k);
    return {s.kind == SectionSize::Finite, s};
}

AutomorphismBridge automorphism_bridge(const Endomorphism& phi, const GroupDescriptor& a) {
    if (!(phi.ambient == a))
        throw std::invalid_argument("automorphism_bridge: ambient mismatch");
    Endomorphism inv = invert(phi);  // throws std::domain_error when not invertible
    Verdict vf = classify_general({phi}, a);
    Verdict vi = classify_general({inv}, a);
    AutomorphismBridge b{vf.rin, vf.lin, vi.rin, vi.lin};
    if (b.rin != b.lin_inv || b.rin_inv != b.lin)
        throw std::logic_error("automorphism_bridge: rin/lin inversion contract violated");
    if (!a.r0().omega && (b.rin != b.lin || b.rin_inv != b.lin_inv))
        throw std::logic_error(
            "automorphism_bridge: equivalence at finite torsion-free rank violated");
    return b;
}

}  // namespace inertia
