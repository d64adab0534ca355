#include "inertia/finite_oracle.hpp"

#include <algorithm>
#include <cstring>
#include <set>

namespace inertia {

namespace {

long long to_ll(const Int& x) { return x.convert_to<long long>(); }

long long pow_ll(long long b, int e) {
    long long r = 1;
    while (e-- > 0) r *= b;
    return r;
}

long long inv_mod_ll(long long a, long long m) {
    return to_ll(inv_mod(Int(a % m + m), Int(m)));
}

constexpr int kMaxDim = 16;

// Flattened arithmetic model of a finite abelian group: per-coordinate
// prime-power moduli, mixed-radix element indexing, and the CRT unit used to
// normalize pivot rows without changing the generated subgroup.
struct Flat {
    int n = 0;
    long long mod[kMaxDim];     // p^e per coordinate
    long long p[kMaxDim];       // prime
    int e[kMaxDim];             // exponent
    long long stride[kMaxDim];  // mixed-radix strides
    long long total = 1;
    long long exponent = 1;  // lcm of the moduli

    explicit Flat(const FiniteAbelianGroup& G) {
        n = (int)G.dim();
        if (n > kMaxDim) throw std::runtime_error("finite oracle: too many coordinates");
        std::map<long long, long long> prime_max;
        for (int j = 0; j < n; ++j) {
            mod[j] = to_ll(G.moduli[j]);
            auto f = factor(G.moduli[j]);
            if (f.size() != 1) throw std::runtime_error("finite oracle: modulus not a prime power");
            p[j] = to_ll(f.front());
            e[j] = (int)valuation(G.moduli[j], f.front());
            prime_max[p[j]] = std::max(prime_max[p[j]], mod[j]);
        }
        for (int j = n - 1; j >= 0; --j) {
            stride[j] = total;
            total *= mod[j];
        }
        for (auto& [q, m] : prime_max) exponent *= m;
    }

    int val(long long x, int j) const {
        int v = 0;
        while (x % p[j] == 0 && v < e[j]) x /= p[j], ++v;
        return v;
    }

    // Integer unit U with U = inv(u) mod the p_j-part of the exponent and
    // U = 1 mod every other prime part; multiplying a row by U fixes the
    // pivot's unit factor without shrinking the generated subgroup.
    long long unit_fix(long long u, int j) const {
        long long P = 1;
        for (int l = 0; l < n; ++l)
            if (p[l] == p[j]) P = std::max(P, mod[l]);
        long long other = exponent / P;
        if (other == 1) return inv_mod_ll(u, P);
        long long t = ((inv_mod_ll(u, P) - 1) % P + P) % P * inv_mod_ll(other % P, P) % P;
        return 1 + other * t;
    }

    long long encode(const long long* row) const {
        long long idx = 0;
        for (int j = 0; j < n; ++j) idx += row[j] * stride[j];
        return idx;
    }
    void decode(long long idx, long long* row) const {
        for (int j = 0; j < n; ++j) {
            row[j] = idx / stride[j];
            idx %= stride[j];
        }
    }
};

// Element image table of one endomorphism matrix.
struct MapTable {
    std::vector<int32_t> img;
    void build(const Flat& F, const long long m[kMaxDim][kMaxDim]) {
        img.resize((std::size_t)F.total);
        long long row[kMaxDim], out[kMaxDim];
        for (long long idx = 0; idx < F.total; ++idx) {
            F.decode(idx, row);
            for (int l = 0; l < F.n; ++l) {
                long long s = 0;
                for (int j = 0; j < F.n; ++j) s += row[j] % F.mod[l] * (m[j][l] % F.mod[l]);
                out[l] = ((s % F.mod[l]) + F.mod[l]) % F.mod[l];
            }
            img[(std::size_t)idx] = (int32_t)F.encode(out);
        }
    }
};

// Incremental Hermite reducer over the coordinate moduli. Pivot j (when
// present) is a row whose first nonzero coordinate is j with value exactly
// p_j^{pv[j]}; saturation rows are inserted automatically so the tracked
// order is exact.
struct Reducer {
    const Flat* F = nullptr;
    int32_t rows[kMaxDim * kMaxDim];
    int8_t pv[kMaxDim];

    void reset(const Flat& f) {
        F = &f;
        std::memset(pv, -1, sizeof pv);
    }

    long long order() const {
        long long o = 1;
        for (int j = 0; j < F->n; ++j)
            if (pv[j] >= 0) o *= pow_ll(F->p[j], F->e[j] - pv[j]);
        return o;
    }

    bool contains(long long* buf) const {
        for (int j = 0; j < F->n; ++j) {
            long long x = ((buf[j] % F->mod[j]) + F->mod[j]) % F->mod[j];
            buf[j] = x;
            if (x == 0) continue;
            if (pv[j] < 0) return false;
            int v = F->val(x, j);
            if (v < pv[j]) return false;
            long long c = x / pow_ll(F->p[j], pv[j]);
            const int32_t* r = rows + j * kMaxDim;
            for (int l = j; l < F->n; ++l) buf[l] -= c * r[l];
        }
        return true;
    }

    // Store buf as the pivot of column j (normalized to p^v) and insert its
    // saturation row.
    void store_pivot(long long* buf, int j, int v) {
        long long piv = pow_ll(F->p[j], v);
        long long x = buf[j];
        long long U = x == piv ? 1 : F->unit_fix(x / piv, j);
        for (int l = j; l < F->n; ++l) {
            long long t = buf[l] % F->mod[l] * (U % F->mod[l]) % F->mod[l];
            buf[l] = (t + F->mod[l]) % F->mod[l];
        }
        int32_t* r = rows + j * kMaxDim;
        for (int l = 0; l < j; ++l) r[l] = 0;
        for (int l = j; l < F->n; ++l) r[l] = (int32_t)buf[l];
        pv[j] = (int8_t)v;
        long long sat[kMaxDim];
        long long c = pow_ll(F->p[j], F->e[j] - v);
        bool nz = false;
        for (int l = 0; l <= j; ++l) sat[l] = 0;
        for (int l = j + 1; l < F->n; ++l) {
            sat[l] = c % F->mod[l] * r[l] % F->mod[l];
            nz |= sat[l] != 0;
        }
        if (nz) insert(sat);
    }

    // Insert a row (destroyed); returns true if the basis grew.
    bool insert(long long* buf) {
        bool changed = false;
        for (int j = 0; j < F->n; ++j) {
            long long x = ((buf[j] % F->mod[j]) + F->mod[j]) % F->mod[j];
            buf[j] = x;
            if (x == 0) continue;
            int v = F->val(x, j);
            while (true) {
                if (pv[j] < 0) {
                    // The row becomes the new pivot; its tail is stored with
                    // it, so processing of this row ends here.
                    store_pivot(buf, j, v);
                    return true;
                }
                int vp = pv[j];
                if (v >= vp) {
                    long long c = x / pow_ll(F->p[j], vp);
                    const int32_t* r = rows + j * kMaxDim;
                    for (int l = j; l < F->n; ++l) buf[l] -= c * r[l];
                    break;
                }
                // New row has a smaller valuation: swap it in, keep reducing
                // the old pivot.
                long long old[kMaxDim];
                const int32_t* r = rows + j * kMaxDim;
                for (int l = 0; l < F->n; ++l) old[l] = r[l];
                store_pivot(buf, j, v);
                changed = true;
                for (int l = 0; l < F->n; ++l) buf[l] = old[l];
                x = buf[j];
                v = vp;
            }
        }
        return changed;
    }

    // Closure under a set of maps; returns true when it terminated with all
    // pivot images inside (always, given enough iterations).
    void close(const std::vector<const MapTable*>& maps) {
        bool grew = true;
        long long buf[kMaxDim];
        while (grew) {
            grew = false;
            for (int j = 0; j < F->n; ++j) {
                if (pv[j] < 0) continue;
                long long row[kMaxDim];
                for (int l = 0; l < F->n; ++l) row[l] = rows[j * kMaxDim + l];
                long long idx = F->encode(row);
                for (const MapTable* t : maps) {
                    F->decode(t->img[(std::size_t)idx], buf);
                    if (insert(buf)) grew = true;
                }
            }
        }
    }
};

// Canonical Hermite-basis DFS over all subgroups (bottom-up rows with the
// modulus-containment residual propagated column by column).
struct Enumerator {
    const Flat& F;
    const std::function<void(const Reducer&, long long)>& visit;
    long long rowsm[kMaxDim][kMaxDim];  // chosen rows, rowsm[j][l]
    int vj[kMaxDim];                    // pivot valuations

    Enumerator(const Flat& f, const std::function<void(const Reducer&, long long)>& v)
        : F(f), visit(v) {}

    void run() { chooseRow(F.n - 1); }

    void chooseRow(int j) {
        if (j < 0) {
            emit();
            return;
        }
        for (int v = 0; v <= F.e[j]; ++v) {
            vj[j] = v;
            for (int l = 0; l < F.n; ++l) rowsm[j][l] = 0;
            rowsm[j][j] = pow_ll(F.p[j], v);
            long long rho[kMaxDim] = {0};
            chooseEntry(j, j + 1, rho);
        }
    }

    // Entries of row j at columns l > j, each constrained by the requirement
    // that p_j^{e_j} * e_j reduces to zero through rows j..n-1.
    void chooseEntry(int j, int l, long long rho[kMaxDim]) {
        if (l == F.n) {
            chooseRow(j - 1);
            return;
        }
        long long P = pow_ll(F.p[j], F.e[j] - vj[j]);  // multiplier of row j
        long long dl = rowsm[l][l];
        // Solve P*x = rho[l] (mod dl), 0 <= x < dl.
        long long g = std::gcd(P % dl, dl);  // gcd(0, dl) = dl
        long long need = ((rho[l] % dl) + dl) % dl;
        if (need % g != 0) return;  // prune: no entry satisfies containment
        long long dg = dl / g;
        long long x0 = dg == 1 ? 0 : need / g % dg * inv_mod_ll(P / g % dg, dg) % dg;
        for (long long k = 0; k < g; ++k) {
            long long x = x0 + k * dg;
            rowsm[j][l] = x;
            long long c = (rho[l] - P * x) / dl;  // exact by choice of x
            long long rho2[kMaxDim];
            for (int t = l + 1; t < F.n; ++t) rho2[t] = rho[t] - c * rowsm[l][t];
            chooseEntry(j, l + 1, rho2);
        }
        rowsm[j][l] = 0;
    }

    void emit() {
        Reducer r;
        r.reset(F);
        long long order = 1;
        for (int j = 0; j < F.n; ++j) {
            if (vj[j] >= F.e[j]) continue;
            r.pv[j] = (int8_t)vj[j];
            int32_t* w = r.rows + j * kMaxDim;
            for (int l = 0; l < F.n; ++l)
                w[l] = (int32_t)(rowsm[j][l] % F.mod[l]);
            order *= pow_ll(F.p[j], F.e[j] - vj[j]);
        }
        visit(r, order);
    }
};

void flat_matrix(const FiniteAbelianGroup& G, const Mat& phi, long long m[kMaxDim][kMaxDim]) {
    std::size_t n = G.dim();
    if (phi.rows != n || phi.cols != n) throw std::invalid_argument("oracle: matrix size");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Int v = phi(i, j) % G.moduli[j];
            if (v < 0) v += G.moduli[j];
            m[i][j] = to_ll(v);
        }
}

std::vector<std::vector<Int>> reducer_gens(const Flat& F, const Reducer& r) {
    std::vector<std::vector<Int>> out;
    for (int j = 0; j < F.n; ++j) {
        if (r.pv[j] < 0) continue;
        std::vector<Int> row(F.n);
        for (int l = 0; l < F.n; ++l) row[l] = r.rows[j * kMaxDim + l];
        out.push_back(std::move(row));
    }
    return out;
}

void seed_reducer(const Flat& F, Reducer& r, const std::vector<std::vector<Int>>& gens) {
    r.reset(F);
    long long buf[kMaxDim];
    for (const auto& g : gens) {
        if (g.size() != (std::size_t)F.n)
            throw std::invalid_argument("oracle: generator length mismatch");
        for (int l = 0; l < F.n; ++l) buf[l] = to_ll(g[l] % F.mod[l]);
        r.insert(buf);
    }
}

std::vector<std::uint64_t> mask_from_reducer(const Flat& F, const Reducer& r) {
    // Element closure, independent of the reducer's own bookkeeping beyond
    // its generator rows.
    std::vector<std::uint64_t> mask((std::size_t)((F.total + 63) / 64));
    auto set = [&](long long i) { mask[(std::size_t)(i >> 6)] |= 1ull << (i & 63); };
    auto get = [&](long long i) {
        return (mask[(std::size_t)(i >> 6)] >> (i & 63)) & 1;
    };
    set(0);
    std::vector<long long> work{0};
    long long row[kMaxDim], g[kMaxDim], s[kMaxDim];
    while (!work.empty()) {
        long long cur = work.back();
        work.pop_back();
        F.decode(cur, row);
        for (int j = 0; j < F.n; ++j) {
            if (r.pv[j] < 0) continue;
            for (int l = 0; l < F.n; ++l) g[l] = r.rows[j * kMaxDim + l];
            for (int l = 0; l < F.n; ++l) s[l] = (row[l] + g[l]) % F.mod[l];
            long long idx = F.encode(s);
            if (!get(idx)) {
                set(idx);
                work.push_back(idx);
            }
        }
    }
    return mask;
}

// Annihilator generator rows: A = diag(m) * R^{-1} where R is the full n x n
// Hermite basis (pivots + implicit modulus rows); exact integer back
// substitution.
void annihilator_rows(const Flat& F, const Reducer& r, long long out[kMaxDim][kMaxDim]) {
    long long R[kMaxDim][kMaxDim];
    for (int j = 0; j < F.n; ++j) {
        for (int l = 0; l < F.n; ++l) R[j][l] = 0;
        if (r.pv[j] >= 0)
            for (int l = j; l < F.n; ++l) R[j][l] = r.rows[j * kMaxDim + l];
        else
            R[j][j] = F.mod[j];
    }
    long long det = 1;
    for (int j = 0; j < F.n; ++j) det *= R[j][j];
    long long c[kMaxDim];
    for (int i = 0; i < F.n; ++i) {
        // Generator i of the annihilator is diag(m) * R^{-1} e_i. Compute
        // c = det * R^{-1} e_i (the adjugate column, integral) by back
        // substitution, then scale coordinate l by m_l / det.
        for (int j = F.n - 1; j >= 0; --j) {
            long long t = (j == i ? det : 0);
            for (int l = j + 1; l < F.n; ++l) t -= R[j][l] * c[l];
            if (t % R[j][j] != 0) throw std::logic_error("annihilator: non-integral solve");
            c[j] = t / R[j][j];
        }
        for (int l = 0; l < F.n; ++l) {
            long long t = F.mod[l] * c[l];
            if (t % det != 0) throw std::logic_error("annihilator: non-integral generator");
            out[i][l] = ((t / det % F.mod[l]) + F.mod[l]) % F.mod[l];
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// FiniteAbelianGroup
// ---------------------------------------------------------------------------

FiniteAbelianGroup FiniteAbelianGroup::from_descriptor(const GroupDescriptor& g) {
    if (!g.is_finite()) throw std::invalid_argument("finite oracle: group is infinite");
    FiniteAbelianGroup G;
    G.g = g;
    for (std::size_t s = 0; s < g.slots.size(); ++s)
        for (long c = 0; c < g.slots[s].mult.count; ++c) {
            G.coords.push_back({s, c});
            G.moduli.push_back(g.slots[s].atom.order());
        }
    return G;
}

FiniteAbelianGroup FiniteAbelianGroup::from_orders(const std::vector<Int>& orders) {
    std::vector<Slot> slots;
    for (const auto& o : orders) {
        auto f = factor(o);
        if (f.size() != 1) throw std::invalid_argument("finite oracle: order not a prime power");
        slots.push_back({Atom::cyclic(f.front(), (long)valuation(o, f.front())),
                         Multiplicity::finite(1)});
    }
    return from_descriptor(GroupDescriptor::from_slots(slots));
}

Int FiniteAbelianGroup::order() const {
    Int o = 1;
    for (const auto& m : moduli) o *= m;
    return o;
}

std::optional<Int> FiniteAbelianGroup::p_group_prime() const {
    std::optional<Int> p;
    for (const auto& m : moduli) {
        Int q = factor(m).front();
        if (p && *p != q) return std::nullopt;
        p = q;
    }
    return p;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

void for_each_subgroup(
    const FiniteAbelianGroup& G,
    const std::function<void(const std::vector<std::vector<Int>>&, const Int&)>& visit) {
    Flat F(G);
    std::function<void(const Reducer&, long long)> v = [&](const Reducer& r, long long order) {
        visit(reducer_gens(F, r), Int(order));
    };
    Enumerator en(F, v);
    en.run();
}

std::size_t count_subgroups(const FiniteAbelianGroup& G) {
    Flat F(G);
    std::size_t count = 0;
    std::function<void(const Reducer&, long long)> v = [&](const Reducer&, long long) {
        ++count;
    };
    Enumerator en(F, v);
    en.run();
    return count;
}

SubgroupTable enumerate_subgroups(const FiniteAbelianGroup& G, Int order_cap,
                                  std::size_t count_cap) {
    if (G.order() > order_cap) throw std::runtime_error("finite oracle: order cap exceeded");
    Flat F(G);
    SubgroupTable table;
    table.group = G;
    std::function<void(const Reducer&, long long)> v = [&](const Reducer& r, long long order) {
        if (table.subgroups.size() >= count_cap)
            throw std::runtime_error("finite oracle: subgroup count cap exceeded");
        OracleSubgroup s;
        s.gens = reducer_gens(F, r);
        s.order = order;
        s.mask = mask_from_reducer(F, r);
        table.subgroups.push_back(std::move(s));
    };
    Enumerator en(F, v);
    en.run();

    // Independent second pass: breadth-first closure of generator sets over
    // raw element arithmetic, deduplicated by membership mask.
    std::set<std::vector<std::uint64_t>> seen;
    std::vector<std::vector<std::uint64_t>> work;
    std::size_t words = (std::size_t)((F.total + 63) / 64);
    std::vector<std::uint64_t> triv(words);
    triv[0] = 1;
    seen.insert(triv);
    work.push_back(triv);
    long long row[kMaxDim], s2[kMaxDim];
    while (!work.empty()) {
        auto cur = work.back();
        work.pop_back();
        for (long long g = 1; g < F.total; ++g) {
            if ((cur[(std::size_t)(g >> 6)] >> (g & 63)) & 1) continue;
            // close cur + <g> under addition
            auto m = cur;
            std::vector<long long> added{g};
            while (!added.empty()) {
                long long a = added.back();
                added.pop_back();
                if ((m[(std::size_t)(a >> 6)] >> (a & 63)) & 1) continue;
                // a is new: add a + x for every known member x
                std::vector<long long> pend{a};
                while (!pend.empty()) {
                    long long b = pend.back();
                    pend.pop_back();
                    if ((m[(std::size_t)(b >> 6)] >> (b & 63)) & 1) continue;
                    m[(std::size_t)(b >> 6)] |= 1ull << (b & 63);
                    F.decode(b, row);
                    for (long long x = 0; x < F.total; ++x) {
                        if (!((m[(std::size_t)(x >> 6)] >> (x & 63)) & 1)) continue;
                        long long xr[kMaxDim];
                        F.decode(x, xr);
                        for (int l = 0; l < F.n; ++l) s2[l] = (row[l] + xr[l]) % F.mod[l];
                        long long idx = F.encode(s2);
                        if (!((m[(std::size_t)(idx >> 6)] >> (idx & 63)) & 1)) pend.push_back(idx);
                    }
                }
            }
            if (seen.insert(m).second) {
                if (seen.size() > count_cap)
                    throw std::runtime_error("finite oracle: subgroup count cap exceeded");
                work.push_back(m);
            }
        }
    }
    if (seen.size() != table.subgroups.size())
        throw std::runtime_error("finite oracle: enumeration passes disagree (" +
                                 std::to_string(table.subgroups.size()) + " vs " +
                                 std::to_string(seen.size()) + ")");
    return table;
}

// ---------------------------------------------------------------------------
// Endomorphism matrices
// ---------------------------------------------------------------------------

bool matrix_well_defined(const FiniteAbelianGroup& G, const Mat& m) {
    std::size_t n = G.dim();
    if (m.rows != n || m.cols != n) return false;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (G.moduli[i] * m(i, j) % G.moduli[j] != 0) return false;
    return true;
}

Mat endo_to_matrix(const FiniteAbelianGroup& G, const Endomorphism& phi) {
    std::size_t n = G.dim();
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        Element e;
        e.coords[G.coords[i]] = Rat(1);
        Element img = apply(phi, canonicalize(G.g, e));
        for (std::size_t j = 0; j < n; ++j) {
            Rat v = img.at(G.coords[j]);
            if (den(v) != 1) throw std::logic_error("endo_to_matrix: non-integer coordinate");
            m(i, j) = num(v);
        }
    }
    if (!matrix_well_defined(G, m)) throw std::logic_error("endo_to_matrix: ill-defined image");
    return m;
}

Mat random_endo_matrix(const FiniteAbelianGroup& G, std::mt19937& rng) {
    std::size_t n = G.dim();
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            // need mod_i * m(i,j) = 0 mod mod_j: m(i,j) multiple of
            // mod_j / gcd(mod_i, mod_j)
            Int step = G.moduli[j] / boost::multiprecision::gcd(G.moduli[i], G.moduli[j]);
            Int choices = G.moduli[j] / step;
            m(i, j) = step * Int(rng() % to_ll(choices));
        }
    return m;
}

// ---------------------------------------------------------------------------
// Closures
// ---------------------------------------------------------------------------

OracleSubgroup subgroup_from_generators(const FiniteAbelianGroup& G,
                                        const std::vector<std::vector<Int>>& gens) {
    Flat F(G);
    Reducer r;
    seed_reducer(F, r, gens);
    OracleSubgroup out;
    out.gens = reducer_gens(F, r);
    out.order = r.order();
    if (F.total <= kOracleOrderCap) out.mask = mask_from_reducer(F, r);
    return out;
}

OracleSubgroup phi_closure_up(const FiniteAbelianGroup& G,
                              const std::vector<std::vector<Int>>& gens,
                              const std::vector<Mat>& phis) {
    Flat F(G);
    Reducer r;
    seed_reducer(F, r, gens);
    std::vector<MapTable> tabs(phis.size());
    std::vector<const MapTable*> ptrs;
    long long m[kMaxDim][kMaxDim];
    for (std::size_t i = 0; i < phis.size(); ++i) {
        flat_matrix(G, phis[i], m);
        tabs[i].build(F, m);
        ptrs.push_back(&tabs[i]);
    }
    r.close(ptrs);
    OracleSubgroup out;
    out.gens = reducer_gens(F, r);
    out.order = r.order();
    if (F.total <= kOracleOrderCap) out.mask = mask_from_reducer(F, r);
    return out;
}

OracleSubgroup phi_closure_down(const FiniteAbelianGroup& G,
                                const std::vector<std::vector<Int>>& gens,
                                const std::vector<Mat>& phis) {
    Flat F(G);
    if (F.total > kOracleOrderCap)
        throw std::runtime_error("phi_closure_down: order cap exceeded");
    Reducer r;
    seed_reducer(F, r, gens);
    auto mask = mask_from_reducer(F, r);
    std::vector<MapTable> tabs(phis.size());
    long long m[kMaxDim][kMaxDim];
    for (std::size_t i = 0; i < phis.size(); ++i) {
        flat_matrix(G, phis[i], m);
        tabs[i].build(F, m);
    }
    auto get = [&](const std::vector<std::uint64_t>& mk, long long i) {
        return (mk[(std::size_t)(i >> 6)] >> (i & 63)) & 1;
    };
    bool shrunk = true;
    while (shrunk) {
        shrunk = false;
        auto next = mask;
        for (long long i = 0; i < F.total; ++i) {
            if (!get(mask, i)) continue;
            for (const auto& t : tabs)
                if (!get(mask, t.img[(std::size_t)i])) {
                    next[(std::size_t)(i >> 6)] &= ~(1ull << (i & 63));
                    shrunk = true;
                    break;
                }
        }
        mask.swap(next);
    }
    // Rebuild generators from the surviving elements.
    OracleSubgroup out;
    Reducer res;
    res.reset(F);
    long long buf[kMaxDim];
    for (long long i = 0; i < F.total; ++i) {
        if (!get(mask, i)) continue;
        F.decode(i, buf);
        res.insert(buf);
    }
    out.gens = reducer_gens(F, res);
    out.order = res.order();
    out.mask = std::move(mask);
    return out;
}

Mat adjoint_matrix(const FiniteAbelianGroup& G, const Mat& phi) {
    std::size_t n = G.dim();
    Mat adj(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            Int t = phi(j, i) * G.moduli[j];
            if (t % G.moduli[i] != 0) throw std::logic_error("adjoint: non-integral entry");
            adj(i, j) = t / G.moduli[i] % G.moduli[j];
        }
    return adj;
}

OracleSubgroup annihilator(const FiniteAbelianGroup& G,
                           const std::vector<std::vector<Int>>& gens) {
    Flat F(G);
    Reducer r;
    seed_reducer(F, r, gens);
    long long a[kMaxDim][kMaxDim];
    annihilator_rows(F, r, a);
    std::vector<std::vector<Int>> rows;
    for (int i = 0; i < F.n; ++i) {
        std::vector<Int> row(F.n);
        for (int l = 0; l < F.n; ++l) row[l] = a[i][l];
        rows.push_back(std::move(row));
    }
    return subgroup_from_generators(G, rows);
}

// ---------------------------------------------------------------------------
// Quantitative bounds
// ---------------------------------------------------------------------------

std::vector<ClosureBoundResult> check_closure_bound_batch(const FiniteAbelianGroup& G,
                                                          const std::vector<Mat>& phis) {
    auto p = G.p_group_prime();
    if (!p) throw std::invalid_argument("check_closure_bound: not a p-group");
    if (G.order() > kOracleOrderCap)
        throw std::runtime_error("check_closure_bound: order cap exceeded");
    Flat F(G);
    std::size_t k = phis.size();
    // Per endomorphism: its element table and its adjoint's table. By
    // duality max_X log|X/X_phi| = max_Y log|Y^{adj}/Y|, so both bounds come
    // from up-closures over the full lattice.
    std::vector<MapTable> up(k), down(k);
    long long m[kMaxDim][kMaxDim];
    for (std::size_t i = 0; i < k; ++i) {
        flat_matrix(G, phis[i], m);
        up[i].build(F, m);
        flat_matrix(G, adjoint_matrix(G, phis[i]), m);
        down[i].build(F, m);
    }
    std::vector<long> worst(k, 0), mdown(k, 0);
    int logG = 0;
    for (int j = 0; j < F.n; ++j) logG += F.e[j];
    std::function<void(const Reducer&, long long)> v = [&](const Reducer& r, long long) {
        int logX = 0;
        for (int j = 0; j < F.n; ++j)
            if (r.pv[j] >= 0) logX += F.e[j] - r.pv[j];
        for (std::size_t i = 0; i < k; ++i) {
            if (worst[i] < logG - logX) {
                Reducer w = r;
                w.close({&up[i]});
                int g = 0;
                for (int j = 0; j < F.n; ++j)
                    if (w.pv[j] >= 0) g += F.e[j] - w.pv[j];
                worst[i] = std::max(worst[i], (long)(g - logX));
            }
            if (mdown[i] < logG - logX) {
                Reducer w = r;
                w.close({&down[i]});
                int g = 0;
                for (int j = 0; j < F.n; ++j)
                    if (w.pv[j] >= 0) g += F.e[j] - w.pv[j];
                mdown[i] = std::max(mdown[i], (long)(g - logX));
            }
        }
    };
    Enumerator en(F, v);
    en.run();
    std::vector<ClosureBoundResult> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        out[i].m = mdown[i];
        out[i].worst = worst[i];
        out[i].holds = out[i].worst <= out[i].m * out[i].m;
    }
    return out;
}

ClosureBoundResult check_closure_bound(const FiniteAbelianGroup& G, const Mat& phi) {
    return check_closure_bound_batch(G, {phi}).front();
}

Int fs_bound(const FiniteAbelianGroup& G, const std::vector<Mat>& phis) {
    if (G.order() > kOracleOrderCap) throw std::runtime_error("fs_bound: order cap exceeded");
    Flat F(G);
    std::size_t k = phis.size();
    std::vector<MapTable> up(k), down(k);
    std::vector<const MapTable*> ups, downs;
    long long m[kMaxDim][kMaxDim];
    for (std::size_t i = 0; i < k; ++i) {
        flat_matrix(G, phis[i], m);
        up[i].build(F, m);
        flat_matrix(G, adjoint_matrix(G, phis[i]), m);
        down[i].build(F, m);
        ups.push_back(&up[i]);
        downs.push_back(&down[i]);
    }
    long long best = 1;
    std::function<void(const Reducer&, long long)> v = [&](const Reducer& r, long long ordX) {
        Reducer u = r;
        u.close(ups);
        long long upIdx = u.order() / ordX;
        // |X / X_Phi| = |ann(X)^{adj} / ann(X)| by duality.
        long long a[kMaxDim][kMaxDim];
        annihilator_rows(F, r, a);
        Reducer d;
        d.reset(F);
        long long buf[kMaxDim];
        for (int i = 0; i < F.n; ++i) {
            for (int l = 0; l < F.n; ++l) buf[l] = a[i][l];
            d.insert(buf);
        }
        long long annOrd = d.order();
        d.close(downs);
        long long downIdx = d.order() / annOrd;
        best = std::max(best, upIdx * downIdx);
    };
    Enumerator en(F, v);
    en.run();
    return Int(best);
}

// ---------------------------------------------------------------------------
// Cyclic phi-modules on general ambients
// ---------------------------------------------------------------------------

CyclicModule cyclic_module(const GroupDescriptor& g, const Element& a,
                           const Endomorphism& phi, int cap) {
    CyclicModule out;
    out.handle.label = "cyclic-module";
    Element cur = canonicalize(g, a);
    bool stable = false;
    for (int k = 0; k < cap; ++k) {
        if (!cur.is_zero()) out.handle.generators.push_back(cur);
        Element next = apply(phi, cur);
        if (next.is_zero() || subgroup_contains(g, out.handle, next)) {
            stable = true;
            break;
        }
        cur = std::move(next);
    }
    if (!stable) {
        out.status = CyclicModuleStatus::CapExceeded;
        return out;
    }
    bool torsion = true;
    for (const auto& gen : out.handle.generators)
        if (!elem_order(g, gen)) torsion = false;
    if (torsion) {
        out.status = CyclicModuleStatus::Finite;
        SectionSize s = section_order(g, trivial_subgroup(), out.handle);
        if (s.is_finite()) out.order = s.n;
        out.torsion_order = out.order;
        return out;
    }
    out.status = CyclicModuleStatus::InfiniteFG;
    // Torsion part, when the module splits coordinate-wise: the projection
    // of each generator to the torsion slots must itself lie in the module.
    SubgroupHandle proj;
    bool split = true;
    for (const auto& gen : out.handle.generators) {
        Element t;
        for (const auto& [key, val] : gen.coords)
            if (g.slots[key.slot].atom.is_torsion()) t.coords[key] = val;
        if (!t.is_zero()) {
            if (!subgroup_contains(g, out.handle, t)) {
                split = false;
                break;
            }
            proj.generators.push_back(std::move(t));
        }
    }
    if (split) {
        if (proj.generators.empty()) {
            out.torsion_order = 1;
        } else {
            SectionSize s = section_order(g, trivial_subgroup(), proj);
            if (s.is_finite()) out.torsion_order = s.n;
        }
    }
    return out;
}

}  // namespace inertia
