#include "inertia/gallery.hpp"

#include <sstream>
#include <stdexcept>

#include "inertia/witness.hpp"

namespace inertia {

namespace {

Endomorphism blockwise_pair(const GroupDescriptor& g, Rat a, Rat b) {
    Endomorphism phi = zero_endo(g);
    phi.blocks.push_back({{0}, Scalar(std::move(a))});
    phi.blocks.push_back({{1}, Scalar(std::move(b))});
    return phi;
}

std::vector<Int> primes_up_to(const Int& P) {
    std::vector<Int> out;
    for (Int p = 2; p <= P; ++p)
        if (is_prime(p)) out.push_back(p);
    return out;
}

}  // namespace

GalleryEntry q_omega_doubling() {
    GalleryEntry e;
    e.name = "q_omega_doubling";
    e.anchor = "x2 on Q^omega: RIN without LIN; its inverse is LIN without RIN";
    e.group = GroupDescriptor::from_slots({{Atom::localized(PrimeSet::all()), Multiplicity::w()}});
    e.endos.push_back(multiplication(e.group, Rat(2)));
    e.expected_rin = true;
    e.expected_lin = false;
    return e;
}

GalleryEntry critical_id_inversion(const Int& p, long d, long e) {
    if (p == 2)
        throw std::invalid_argument(
            "critical_id_inversion: p = 2 degenerates (1 and -1 agree modulo a finite subgroup)");
    if (!is_prime(p)) throw std::invalid_argument("critical_id_inversion: p must be prime");
    if (d < 1 || e < 1) throw std::invalid_argument("critical_id_inversion: d, e >= 1 required");
    GalleryEntry out;
    out.name = "critical_id_inversion";
    std::ostringstream a;
    a << "identity on Z(" << p << "^" << e << ")^omega, inversion on Z(" << p << "^inf)^" << d
      << ": periodic, inertial, non-finitary";
    out.anchor = a.str();
    out.group = GroupDescriptor::from_slots(
        {{Atom::cyclic(p, e), Multiplicity::w()}, {Atom::prufer(p), Multiplicity::finite(d)}});
    out.endos.push_back(blockwise_pair(out.group, Rat(1), Rat(-1)));
    out.expected_rin = true;
    out.expected_lin = true;
    return out;
}

Endomorphism PropositionAModel::sigma(const std::vector<Int>& s) const {
    const GroupDescriptor& g = entry.group;
    if (s.size() != primes.size())
        throw std::invalid_argument("sigma: one coefficient per prime required");
    Endomorphism phi = multiplication(g, Rat(1));
    for (std::size_t i = 0; i < primes.size(); ++i) {
        const Int& p = primes[i];
        Int sp = s[i] % p;
        if (sp < 0) sp += p;
        if (sp == 0) continue;

        // A finitary functional lambda with lambda(d_i) = sp and lambda = 0 on
        // v and the other generators (mod p). Valid weights live only on the
        // free coordinate and the Z(p)-coordinates.
        std::vector<CoordKey> unknowns;
        for (std::size_t sl = 0; sl < g.slots.size(); ++sl) {
            const Atom& at = g.slots[sl].atom;
            bool eligible = at.kind == AtomKind::Localized ||
                            (at.kind == AtomKind::Cyclic && at.p == p);
            if (!eligible) continue;
            for (long c = 0; c < g.slots[sl].mult.count; ++c) unknowns.push_back({sl, c});
        }
        std::vector<const Element*> gens;
        std::vector<Int> want;
        gens.push_back(&v);
        want.push_back(0);
        for (std::size_t jj = 0; jj < d.size(); ++jj) {
            gens.push_back(&d[jj]);
            want.push_back(jj == i ? sp : Int(0));
        }
        // Desk scale: brute-force the weight vector over (Z/p)^unknowns.
        std::vector<Int> w(unknowns.size(), 0);
        bool found = false;
        while (!found) {
            bool ok = true;
            for (std::size_t jj = 0; jj < gens.size() && ok; ++jj) {
                Int acc = 0;
                for (std::size_t u = 0; u < unknowns.size(); ++u) {
                    Rat cv = gens[jj]->at(unknowns[u]);
                    if (den(cv) != 1) { ok = false; break; }
                    acc += w[u] * num(cv);
                }
                if (ok && ((acc - want[jj]) % p) != 0) ok = false;
            }
            if (ok) { found = true; break; }
            std::size_t u = 0;
            for (; u < w.size(); ++u) {
                if (++w[u] < p) break;
                w[u] = 0;
            }
            if (u == w.size()) break;  // exhausted
        }
        if (!found) throw std::logic_error("sigma: no valid finitary functional found");
        FinitaryContribution f;
        f.modulus = p;
        for (std::size_t u = 0; u < unknowns.size(); ++u)
            if (w[u] != 0) f.weights[unknowns[u]] = Rat(w[u]);
        f.target = t[i];
        phi.finitary.contributions.push_back(std::move(f));
    }
    WellDefined wd = is_well_defined(phi);
    if (!wd) throw std::logic_error("sigma: ill-defined endomorphism: " + wd.diagnostic);
    return phi;
}

PropositionAModel proposition_a(const Int& P) {
    if (P < 2) throw std::invalid_argument("proposition_a: P >= 2 required");
    PropositionAModel m;
    m.primes = primes_up_to(P);
    std::size_t k = m.primes.size();

    // Generators (v, d_2, ..., d_P); relations p^2 * d_p - p * v = 0, so that
    // t_p := p*d_p - v has order exactly p.
    Mat rel(k, k + 1);
    for (std::size_t i = 0; i < k; ++i) {
        rel(i, 0) = -m.primes[i];
        rel(i, i + 1) = m.primes[i] * m.primes[i];
    }
    GroupDescriptor g = GroupDescriptor::from_presentation(rel);

    std::vector<Int> coeffs(k + 1, 0);
    coeffs[0] = 1;
    m.v = elem_from_generators(g, coeffs);
    for (std::size_t i = 0; i < k; ++i) {
        coeffs.assign(k + 1, 0);
        coeffs[i + 1] = 1;
        m.d.push_back(elem_from_generators(g, coeffs));
        Element ti = elem_add(g, elem_scale(g, Rat(m.primes[i]), m.d.back()), elem_neg(g, m.v));
        auto ord = elem_order(g, ti);
        if (!ord || *ord != m.primes[i])
            throw std::logic_error("proposition_a: t_p does not have order p");
        m.t.push_back(std::move(ti));
    }
    m.vt.label = "V+T";
    m.vt.generators.push_back(m.v);
    for (const auto& ti : m.t) m.vt.generators.push_back(ti);

    m.entry.name = "proposition_a";
    std::ostringstream a;
    a << "truncated series stabilizer at P = " << P << ": sigma fixes V+T and H/(V+T)";
    m.entry.anchor = a.str();
    m.entry.group = g;
    m.entry.expected_rin = true;
    m.entry.expected_lin = true;
    m.entry.endos.push_back(m.sigma(std::vector<Int>(k, 1)));
    return m;
}

std::vector<std::string> gallery_names() {
    return {"q_omega_doubling", "critical_id_inversion", "proposition_a"};
}

namespace {

void report_check(std::ostringstream& out, bool& all_ok, const std::string& label, bool ok) {
    out << "  " << (ok ? "pass" : "FAIL") << "  " << label << "\n";
    all_ok = all_ok && ok;
}

}  // namespace

std::pair<bool, std::string> run_gallery_entry(const std::string& name) {
    std::ostringstream out;
    bool ok = true;
    if (name == "q_omega_doubling") {
        GalleryEntry e = q_omega_doubling();
        out << e.name << ": " << e.anchor << "\n";
        Verdict v = classify_general(e.endos, e.group);
        report_check(out, ok, "rin/lin match the expected verdict",
                     v.rin == e.expected_rin && v.lin == e.expected_lin);
        AutomorphismBridge b = automorphism_bridge(e.endos[0], e.group);
        report_check(out, ok, "bridge (rin, lin, rin_inv, lin_inv) = (T, F, F, T)",
                     b.rin && !b.lin && !b.rin_inv && b.lin_inv);
        NonInertialWitness w = free_rank_witness(e.group, Rat(1, 2));
        report_check(out, ok, "free-rank witness for the inverse verifies",
                     verify_witness(w, multiplication(e.group, Rat(1, 2))).ok);
    } else if (name == "critical_id_inversion") {
        GalleryEntry e = critical_id_inversion(3, 1, 1);
        out << e.name << ": " << e.anchor << "\n";
        Verdict v = classify_general(e.endos, e.group);
        report_check(out, ok, "rin and lin both hold", v.rin && v.lin);
        report_check(out, ok, "phi^2 = identity",
                     acts_as_scalar(compose(e.endos[0], e.endos[0]), Rat(1)));
        Endomorphism dev = add(e.endos[0], negate(multiplication(e.group, Rat(1))));
        report_check(out, ok, "phi is not finitary (phi - 1 has infinite image)",
                     image_finite(dev).kind == SectionSize::CertifiedInfinite);
        auto [cok, csz] = commutator_check(e.endos[0], multiplication(e.group, Rat(2)));
        report_check(out, ok, "commutator with x2 is Finite(1)",
                     cok && csz == SectionSize::finite(1));
    } else if (name == "proposition_a") {
        PropositionAModel m = proposition_a(5);
        out << m.entry.name << ": " << m.entry.anchor << "\n";
        GroupDescriptor tp = component(m.entry.group, PrimeSet({Int(2), Int(3), Int(5)}));
        bool torsion_ok = tp.is_finite() && tp.torsion_primes() == std::set<Int>{2, 3, 5};
        report_check(out, ok, "torsion part is Z(2) + Z(3) + Z(5)", torsion_ok);
        Verdict v = classify_general(m.entry.endos, m.entry.group);
        report_check(out, ok, "sigma(1,1,1) is inertial", v.rin);
        Endomorphism s = m.entry.endos[0];
        SectionSize img = image_finite(add(s, negate(multiplication(m.entry.group, Rat(1)))));
        report_check(out, ok, "image of sigma - id is Finite(30)",
                     img == SectionSize::finite(30));
        bool fixes = true;
        for (const auto& gen : m.vt.generators)
            fixes = fixes && apply(s, gen) == gen;
        report_check(out, ok, "sigma fixes V + T pointwise", fixes);
    } else {
        return {false, "unknown gallery entry: " + name};
    }
    return {ok, out.str()};
}

}  // namespace inertia
