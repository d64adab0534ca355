#include "inertia/group.hpp"

#include <algorithm>
#include <sstream>

namespace inertia {

// ---------------------------------------------------------------------------
// Atoms
// ---------------------------------------------------------------------------

Atom Atom::cyclic(Int p, long e) {
    if (!is_prime(p) || e < 1) throw std::invalid_argument("Atom::cyclic");
    Atom a;
    a.kind = AtomKind::Cyclic;
    a.p = std::move(p);
    a.e = e;
    return a;
}

Atom Atom::prufer(Int p) {
    if (!is_prime(p)) throw std::invalid_argument("Atom::prufer");
    Atom a;
    a.kind = AtomKind::Prufer;
    a.p = std::move(p);
    return a;
}

Atom Atom::localized(PrimeSet pi) {
    Atom a;
    a.kind = AtomKind::Localized;
    a.pi = std::move(pi);
    return a;
}

Int Atom::order() const {
    if (kind != AtomKind::Cyclic) throw std::logic_error("Atom::order: not cyclic");
    return pow_int(p, e);
}

std::string Atom::str() const {
    std::ostringstream os;
    switch (kind) {
        case AtomKind::Cyclic:
            os << "Z(" << p;
            if (e > 1) os << "^" << e;
            os << ")";
            break;
        case AtomKind::Prufer:
            os << "Z(" << p << "^inf)";
            break;
        case AtomKind::Localized:
            if (pi.is_all()) os << "Q";
            else if (pi.empty()) os << "Z";
            else {
                os << "Q[";
                bool first = true;
                for (const auto& q : pi.primes()) {
                    if (!first) os << ",";
                    os << q;
                    first = false;
                }
                os << "]";
            }
            break;
    }
    return os.str();
}

std::string GroupDescriptor::str() const {
    if (slots.empty()) return "0";
    std::ostringstream os;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (i) os << " + ";
        os << slots[i].atom.str();
        if (slots[i].mult.omega) os << "^w";
        else if (slots[i].mult.count > 1) os << "^" << slots[i].mult.count;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Presented groups
// ---------------------------------------------------------------------------

namespace {

Mat inverse_unimodular(const Mat& v) {
    // Gaussian elimination over the rationals; v is unimodular so the result
    // is integral.
    std::size_t n = v.rows;
    std::vector<std::vector<Rat>> a(n, std::vector<Rat>(2 * n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i][j] = Rat(v(i, j));
        a[i][n + i] = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && a[piv][c] == 0) ++piv;
        if (piv == n) throw std::invalid_argument("inverse_unimodular: singular");
        std::swap(a[piv], a[c]);
        Rat d = a[c][c];
        for (auto& x : a[c]) x /= d;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || a[i][c] == 0) continue;
            Rat f = a[i][c];
            for (std::size_t j = 0; j < 2 * n; ++j) a[i][j] -= f * a[c][j];
        }
    }
    Mat out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (den(a[i][n + j]) != 1)
                throw std::invalid_argument("inverse_unimodular: not unimodular");
            out(i, j) = num(a[i][n + j]);
        }
    return out;
}

}  // namespace

GroupDescriptor GroupDescriptor::from_presentation(const Mat& relations) {
    if (relations.cols == 0) return GroupDescriptor{};
    SnfResult s = snf(relations);
    std::size_t n = relations.cols;
    std::size_t r = std::min(relations.rows, relations.cols);

    auto fg = std::make_shared<FgData>();
    fg->relations = relations;
    fg->v = s.v;
    fg->vinv = inverse_unimodular(s.v);

    // (p, e, ycol, d) for every prime-power CRT factor of every torsion column.
    struct Factor {
        Int p;
        long e;
        std::size_t ycol;
        Int d;
    };
    std::vector<Factor> factors;
    std::vector<std::size_t> free_cols;
    for (std::size_t j = 0; j < n; ++j) {
        Int d = j < r ? s.d(j, j) : Int(0);
        if (d == 1) continue;  // trivial factor
        if (d == 0) {
            free_cols.push_back(j);
            continue;
        }
        for (const auto& p : factor(d))
            factors.push_back({p, valuation(d, p), j, d});
    }
    std::stable_sort(factors.begin(), factors.end(), [](const Factor& a, const Factor& b) {
        return std::tie(a.p, a.e) < std::tie(b.p, b.e);
    });

    GroupDescriptor g;
    for (std::size_t i = 0; i < factors.size();) {
        std::size_t j = i;
        while (j < factors.size() && factors[j].p == factors[i].p && factors[j].e == factors[i].e)
            ++j;
        g.slots.push_back({Atom::cyclic(factors[i].p, factors[i].e),
                           Multiplicity::finite(static_cast<long>(j - i))});
        for (std::size_t k = i; k < j; ++k)
            fg->coords.push_back({factors[k].ycol, pow_int(factors[k].p, factors[k].e),
                                  factors[k].d});
        i = j;
    }
    if (!free_cols.empty()) {
        g.slots.push_back({Atom::localized(PrimeSet{}),
                           Multiplicity::finite(static_cast<long>(free_cols.size()))});
        for (auto c : free_cols) fg->coords.push_back({c, 0, 0});
    }
    g.fg = std::move(fg);
    return g;
}

Element elem_from_generators(const GroupDescriptor& g, const std::vector<Int>& x) {
    if (!g.fg) throw std::invalid_argument("elem_from_generators: not a presented group");
    const FgData& fg = *g.fg;
    if (x.size() != fg.v.rows) throw std::invalid_argument("elem_from_generators: arity");
    std::vector<Int> y(fg.v.cols);
    for (std::size_t j = 0; j < fg.v.cols; ++j)
        for (std::size_t i = 0; i < fg.v.rows; ++i) y[j] += x[i] * fg.v(i, j);
    Element e;
    std::size_t ci = 0;
    for (std::size_t s = 0; s < g.slots.size(); ++s) {
        long m = g.slots[s].mult.count;
        for (long c = 0; c < m; ++c, ++ci) {
            const auto& cc = fg.coords[ci];
            Rat v(y[cc.ycol]);
            e.coords[{s, c}] = v;
        }
    }
    return canonicalize(g, std::move(e));
}

// ---------------------------------------------------------------------------
// Elements
// ---------------------------------------------------------------------------

Rat canonical_coord(const Atom& atom, const Rat& v) {
    if (v == 0) return Rat(0);
    switch (atom.kind) {
        case AtomKind::Cyclic: {
            Int q = atom.order();
            Int d = den(v);
            if (d % atom.p == 0)
                throw std::domain_error("coordinate not in Z(" + atom.p.str() + "^" +
                                        std::to_string(atom.e) + ")");
            Int r = num(v) % q * inv_mod(d, q) % q;
            if (r < 0) r += q;
            return Rat(r);
        }
        case AtomKind::Prufer: {
            // p-primary component of v mod 1.
            Int d = den(v);
            long i = d % atom.p == 0 ? valuation(d, atom.p) : 0;
            if (i == 0) return Rat(0);
            Int q = pow_int(atom.p, i);
            Int m = d / q;
            Int a = num(v) % q * inv_mod(m, q) % q;
            if (a < 0) a += q;
            if (a == 0) return Rat(0);
            return Rat(a, q);
        }
        case AtomKind::Localized: {
            if (!is_pi_number(den(v), atom.pi))
                throw std::domain_error("denominator not admissible on " + atom.str());
            return v;
        }
    }
    throw std::logic_error("unreachable");
}

Element canonicalize(const GroupDescriptor& g, Element e) {
    Element out;
    for (auto& [k, v] : e.coords) {
        if (k.slot >= g.slots.size()) throw std::domain_error("coordinate outside ambient");
        const Slot& s = g.slots[k.slot];
        if (!s.mult.omega && (k.copy < 0 || k.copy >= s.mult.count))
            throw std::domain_error("copy index outside slot multiplicity");
        Rat c = canonical_coord(s.atom, v);
        if (c != 0) out.coords[k] = std::move(c);
    }
    return out;
}

Element elem_add(const GroupDescriptor& g, const Element& a, const Element& b) {
    Element r = a;
    for (const auto& [k, v] : b.coords) r.coords[k] += v;
    return canonicalize(g, std::move(r));
}

Element elem_neg(const GroupDescriptor& g, const Element& a) {
    Element r;
    for (const auto& [k, v] : a.coords) r.coords[k] = -v;
    return canonicalize(g, std::move(r));
}

Element elem_scale(const GroupDescriptor& g, const Rat& r, const Element& a) {
    Element out;
    for (const auto& [k, v] : a.coords) out.coords[k] = r * v;
    return canonicalize(g, std::move(out));
}

Element unit_element(const GroupDescriptor& g, CoordKey c) {
    Element e;
    const Atom& atom = g.slots.at(c.slot).atom;
    e.coords[c] = atom.kind == AtomKind::Prufer ? Rat(1, atom.p) : Rat(1);
    return canonicalize(g, std::move(e));
}

std::optional<Int> elem_order(const GroupDescriptor& g, const Element& a) {
    Int o = 1;
    for (const auto& [k, v] : a.coords) {
        const Atom& atom = g.slots[k.slot].atom;
        switch (atom.kind) {
            case AtomKind::Cyclic: {
                Int q = atom.order();
                Int d = boost::multiprecision::gcd(num(v), q);
                o = boost::multiprecision::lcm(o, q / d);
                break;
            }
            case AtomKind::Prufer:
                o = boost::multiprecision::lcm(o, den(v));
                break;
            case AtomKind::Localized:
                if (v != 0) return std::nullopt;
                break;
        }
    }
    return o;
}

// ---------------------------------------------------------------------------
// Descriptor predicates
// ---------------------------------------------------------------------------

Multiplicity GroupDescriptor::r0() const {
    long total = 0;
    for (const auto& s : slots)
        if (s.atom.kind == AtomKind::Localized) {
            if (s.mult.omega) return Multiplicity::w();
            total += s.mult.count;
        }
    return Multiplicity::finite(total);
}

std::set<Int> GroupDescriptor::torsion_primes() const {
    std::set<Int> out;
    for (const auto& s : slots)
        if (s.atom.is_torsion()) out.insert(s.atom.p);
    return out;
}

std::optional<Int> GroupDescriptor::exponent_bound() const {
    Int b = 1;
    for (const auto& s : slots) {
        if (s.atom.kind == AtomKind::Prufer) return std::nullopt;
        if (s.atom.kind == AtomKind::Cyclic)
            b = boost::multiprecision::lcm(b, s.atom.order());
    }
    return b;
}

bool GroupDescriptor::has_min() const {
    for (const auto& s : slots) {
        if (s.atom.kind == AtomKind::Localized) return false;
        if (s.mult.omega) return false;
    }
    return true;
}

bool GroupDescriptor::is_periodic() const {
    for (const auto& s : slots)
        if (!s.atom.is_torsion()) return false;
    return true;
}

bool GroupDescriptor::is_torsion_free() const {
    for (const auto& s : slots)
        if (s.atom.is_torsion()) return false;
    return true;
}

bool GroupDescriptor::is_finite() const {
    for (const auto& s : slots)
        if (!s.atom.is_finite() || s.mult.omega) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Canonical subgroups (descriptor level)
// ---------------------------------------------------------------------------

GroupDescriptor torsion_part(const GroupDescriptor& a) {
    GroupDescriptor g;
    for (const auto& s : a.slots)
        if (s.atom.is_torsion()) g.slots.push_back(s);
    return g;
}

GroupDescriptor component(const GroupDescriptor& a, const PrimeSet& pi) {
    GroupDescriptor g;
    for (const auto& s : a.slots)
        if (s.atom.is_torsion() && pi.contains(s.atom.p)) g.slots.push_back(s);
    return g;
}

GroupDescriptor n_socle(const GroupDescriptor& a, const Int& n) {
    if (n < 1) throw std::invalid_argument("n_socle: n must be positive");
    GroupDescriptor g;
    for (const auto& s : a.slots) {
        if (!s.atom.is_torsion()) continue;
        if (n % s.atom.p != 0) continue;
        long k = valuation(n, s.atom.p);
        long e = s.atom.kind == AtomKind::Cyclic ? std::min(k, s.atom.e) : k;
        g.slots.push_back({Atom::cyclic(s.atom.p, e), s.mult});
    }
    return g;
}

GroupDescriptor divisible_part(const GroupDescriptor& a) {
    GroupDescriptor g;
    for (const auto& s : a.slots) {
        if (s.atom.kind == AtomKind::Prufer) g.slots.push_back(s);
        if (s.atom.kind == AtomKind::Localized && s.atom.pi.is_all()) g.slots.push_back(s);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Section arithmetic (truncated lattice model)
// ---------------------------------------------------------------------------

SubgroupHandle trivial_subgroup(std::string label) {
    SubgroupHandle h;
    h.label = std::move(label);
    return h;
}

namespace {

// Closure primes acting on one generator: union of the closure sets of the
// flagged slots meeting its support.
PrimeSet generator_closure(const GroupDescriptor& g, const SubgroupHandle& h,
                           const Element& gen) {
    PrimeSet pi;
    for (const auto& [k, v] : gen.coords) {
        auto it = h.divisibleClosure.find(k.slot);
        if (it == h.divisibleClosure.end()) continue;
        const Slot& slot = g.slots[k.slot];
        if (slot.atom.kind == AtomKind::Cyclic)
            throw std::domain_error("divisibleClosure names a Cyclic slot");
        if (slot.atom.kind == AtomKind::Localized && !it->second.subset_of(slot.atom.pi))
            throw std::domain_error("closure primes exceed the slot's prime set");
        pi = pi.unite(it->second);
    }
    if (pi.is_all())
        throw std::domain_error("closure by all primes is not finitely representable");
    return pi;
}

// Generators of h scaled for truncation level L: g / prod(p^L) over the
// closure primes of g. Z[1/pi]*g truncated at denominator exponent L is the
// cyclic group on that single scaled generator.
std::vector<Element> scaled_generators(const GroupDescriptor& g, const SubgroupHandle& h,
                                       long level) {
    std::vector<Element> out;
    for (const auto& gen : h.generators) {
        PrimeSet pi = generator_closure(g, h, gen);
        Rat f(1);
        for (const auto& p : pi.primes()) f /= Rat(pow_int(p, level));
        out.push_back(f == 1 ? canonicalize(g, gen) : elem_scale(g, f, gen));
    }
    return out;
}

bool has_closure(const SubgroupHandle& h) { return !h.divisibleClosure.empty(); }

// First truncation level past the transient regime: closure scaling must
// overtake every raw denominator depth before plateaus are meaningful.
long stabilization_start(const GroupDescriptor& g, const SubgroupHandle& h) {
    long depth = 0;
    for (const auto& gen : h.generators)
        for (const auto& [k, v] : gen.coords) {
            const Atom& atom = g.slots[k.slot].atom;
            if (v == 0) continue;
            if (atom.kind == AtomKind::Prufer && den(v) % atom.p == 0)
                depth = std::max(depth, valuation(den(v), atom.p));
            else if (atom.kind == AtomKind::Localized)
                for (const auto& p : factor(den(v)))
                    depth = std::max(depth, valuation(den(v), p));
        }
    return depth + 2;
}

struct CoordModel {
    std::vector<CoordKey> coords;
    std::map<CoordKey, std::size_t> index;
    std::vector<Int> modulus;  // 0 on free coordinates
    std::vector<Int> scale;    // value -> integer multiplier
};

CoordModel build_model(const GroupDescriptor& g,
                       const std::vector<const std::vector<Element>*>& gen_lists) {
    CoordModel m;
    for (const auto* gl : gen_lists)
        for (const auto& e : *gl)
            for (const auto& [k, v] : e.coords)
                if (!m.index.count(k)) {
                    m.index[k] = 0;
                    m.coords.push_back(k);
                }
    std::sort(m.coords.begin(), m.coords.end());
    for (std::size_t i = 0; i < m.coords.size(); ++i) m.index[m.coords[i]] = i;
    m.modulus.resize(m.coords.size());
    m.scale.assign(m.coords.size(), Int(1));
    for (std::size_t i = 0; i < m.coords.size(); ++i) {
        const Atom& atom = g.slots[m.coords[i].slot].atom;
        switch (atom.kind) {
            case AtomKind::Cyclic:
                m.modulus[i] = atom.order();
                break;
            case AtomKind::Prufer: {
                long lev = 1;
                for (const auto* gl : gen_lists)
                    for (const auto& e : *gl) {
                        Rat v = e.at(m.coords[i]);
                        if (v != 0) lev = std::max(lev, valuation(den(v), atom.p));
                    }
                m.scale[i] = pow_int(atom.p, lev);
                m.modulus[i] = m.scale[i];
                break;
            }
            case AtomKind::Localized: {
                Int l = 1;
                for (const auto* gl : gen_lists)
                    for (const auto& e : *gl) {
                        Rat v = e.at(m.coords[i]);
                        if (v != 0) l = boost::multiprecision::lcm(l, den(v));
                    }
                m.scale[i] = l;
                m.modulus[i] = 0;
                break;
            }
        }
    }
    return m;
}

// Integer lattice rows for a generator list, including the ambient's modulus
// relations on every modeled torsion coordinate.
Mat lattice_rows(const CoordModel& m, const std::vector<Element>& gens) {
    std::size_t torsion = 0;
    for (const auto& mod : m.modulus)
        if (mod != 0) ++torsion;
    Mat out(gens.size() + torsion, m.coords.size());
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (const auto& [k, v] : gens[i].coords) {
            std::size_t j = m.index.at(k);
            Rat scaled = v * Rat(m.scale[j]);
            assert(den(scaled) == 1);
            out(i, j) = num(scaled);
        }
    std::size_t r = gens.size();
    for (std::size_t j = 0; j < m.coords.size(); ++j)
        if (m.modulus[j] != 0) out(r++, j) = m.modulus[j];
    return out;
}

Mat lattice_intersection(const Mat& a, const Mat& b) {
    Mat stacked(a.rows + b.rows, a.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) stacked(i, j) = a(i, j);
    for (std::size_t i = 0; i < b.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) stacked(a.rows + i, j) = -b(i, j);
    Mat k = left_kernel(stacked);
    Mat inter(k.rows, a.cols);
    for (std::size_t i = 0; i < k.rows; ++i)
        for (std::size_t t = 0; t < a.rows; ++t) {
            if (k(i, t) == 0) continue;
            for (std::size_t j = 0; j < a.cols; ++j) inter(i, j) += k(i, t) * a(t, j);
        }
    return inter;
}

}  // namespace

SectionSize section_order(const GroupDescriptor& g, const SubgroupHandle& x,
                          const SubgroupHandle& y, long precision, const Int& threshold) {
    bool level_dependent = has_closure(x) || has_closure(y);
    long start = level_dependent
                     ? std::max(stabilization_start(g, x), stabilization_start(g, y))
                     : 0;
    std::optional<Int> prev;
    int stable = 0;
    for (long level = start; level <= start + precision; ++level) {
        auto gx = scaled_generators(g, x, level);
        auto gy = scaled_generators(g, y, level);
        CoordModel m = build_model(g, {&gx, &gy});
        Mat sub = lattice_rows(m, gx);
        std::vector<Element> all = gx;
        all.insert(all.end(), gy.begin(), gy.end());
        Mat sup = lattice_rows(m, all);
        auto idx = lattice_index(sup, sub);
        if (!idx) return SectionSize::at_least(threshold);  // torsion-free rank grows
        if (*idx > threshold) return SectionSize::at_least(threshold);
        if (!level_dependent) return SectionSize::finite(*idx);
        stable = prev && *prev == *idx ? stable + 1 : 0;
        if (stable >= 2) return SectionSize::finite(*idx);
        prev = *idx;
    }
    return SectionSize::at_least(*prev);
}

long section_rank_growth(const GroupDescriptor& g, const SubgroupHandle& x,
                         const SubgroupHandle& y) {
    auto gx = scaled_generators(g, x, 0);
    auto gy = scaled_generators(g, y, 0);
    CoordModel m = build_model(g, {&gx, &gy});
    Mat sub = lattice_rows(m, gx);
    std::vector<Element> all = gx;
    all.insert(all.end(), gy.begin(), gy.end());
    Mat sup = lattice_rows(m, all);
    return static_cast<long>(rank(sup)) - static_cast<long>(rank(sub));
}

CommensurabilityResult is_commensurable(const GroupDescriptor& g, const SubgroupHandle& x,
                                        const SubgroupHandle& y, long precision,
                                        const Int& threshold) {
    bool level_dependent = has_closure(x) || has_closure(y);
    long start = level_dependent
                     ? std::max(stabilization_start(g, x), stabilization_start(g, y))
                     : 0;
    std::optional<std::pair<Int, Int>> prev;
    int stable = 0;
    auto bail = [&](std::optional<Int> a, std::optional<Int> b) {
        SectionSize sa = a ? SectionSize::finite(*a) : SectionSize::at_least(threshold);
        SectionSize sb = b ? SectionSize::finite(*b) : SectionSize::at_least(threshold);
        return CommensurabilityResult{false, sa, sb};
    };
    for (long level = start; level <= start + precision; ++level) {
        auto gx = scaled_generators(g, x, level);
        auto gy = scaled_generators(g, y, level);
        CoordModel m = build_model(g, {&gx, &gy});
        Mat lx = lattice_rows(m, gx);
        Mat ly = lattice_rows(m, gy);
        Mat inter = lattice_intersection(lx, ly);
        auto a = lattice_index(ly, inter);  // |Y/(X∩Y)|
        auto b = lattice_index(lx, inter);  // |X/(X∩Y)|
        if (!a || !b || *a > threshold || *b > threshold)
            return bail(a && *a <= threshold ? a : std::nullopt,
                        b && *b <= threshold ? b : std::nullopt);
        stable = prev && *prev == std::pair(*a, *b) ? stable + 1 : 0;
        if (!level_dependent || stable >= 2)
            return {true, SectionSize::finite(*a), SectionSize::finite(*b)};
        prev = {*a, *b};
    }
    return {false, SectionSize::at_least(prev->first), SectionSize::at_least(prev->second)};
}

bool subgroup_contains(const GroupDescriptor& g, const SubgroupHandle& x, const Element& a,
                       long precision) {
    Element c = canonicalize(g, a);
    if (c.is_zero()) return true;
    auto gx = scaled_generators(g, x, precision);
    std::vector<Element> probe{c};
    CoordModel m = build_model(g, {&gx, &probe});
    Mat lx = lattice_rows(m, gx);
    std::vector<Int> row(m.coords.size());
    for (const auto& [k, v] : c.coords) {
        std::size_t j = m.index.at(k);
        Rat scaled = v * Rat(m.scale[j]);
        if (den(scaled) != 1) return false;
        row[j] = num(scaled);
    }
    return hnf_contains(hnf(lx), std::move(row));
}

std::string SectionSize::str() const {
    switch (kind) {
        case Finite: return n.str();
        case AtLeast: return ">=" + n.str();
        case CertifiedInfinite: return "infinite(" + growth + ")";
    }
    return "";
}

}  // namespace inertia
