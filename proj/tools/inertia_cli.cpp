#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <random>

#include "inertia/finite_oracle.hpp"
#include "inertia/gallery.hpp"
#include "inertia/json_io.hpp"
#include "inertia/parse.hpp"

using namespace inertia;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitInputError = 2;

void write_json(const Json& doc, const std::string& path) {
    std::string text = doc.dump(2) + "\n";
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open " + path + " for writing");
    out << text;
}

std::string describe_certificate(const InertialCertificate& c) {
    std::ostringstream o;
    if (c.kind == InertialCertificate::Kind::CaseA) {
        o << "certificate: CaseA, m = [";
        for (std::size_t i = 0; i < c.m.size(); ++i) o << (i ? ", " : "") << c.m[i].str();
        o << "], |A/A0| <= " << c.index_bound.str();
    } else {
        auto primes = [](const PrimeSet& ps) {
            std::ostringstream s;
            bool first = true;
            for (const auto& p : ps.primes()) {
                s << (first ? "" : ",") << p.str();
                first = false;
            }
            return s.str().empty() ? std::string("-") : s.str();
        };
        o << "certificate: CaseB, pi = {" << primes(c.pi) << "}, pi1 = {" << primes(c.pi1)
          << "}, rank V = " << c.rank_v << ", |A/A0| <= " << c.index_bound.str();
    }
    return o.str();
}

std::string describe_witness(const NonInertialWitness& w) {
    std::ostringstream o;
    o << "witness: ";
    switch (w.kind) {
        case WitnessKind::Diagonal: o << "diagonal chain"; break;
        case WitnessKind::FreeRank: o << "free-rank family"; break;
        case WitnessKind::Independence: o << "independent direction"; break;
        case WitnessKind::PrimaryLin: o << "primary components"; break;
    }
    o << ", growth " << w.growth_expr() << ", verified to i = " << w.verified_to;
    return o.str();
}

// The first family member the witness refutes (for the JSON artifact).
std::size_t witness_endo_index(const std::vector<Endomorphism>& phis, const GroupDescriptor& g) {
    for (std::size_t i = 0; i < phis.size(); ++i)
        if (!classify_general({phis[i]}, g).rin) return i;
    return 0;
}

int cmd_classify(const std::string& group_spec, const std::vector<std::string>& endo_specs,
                 const std::string& json_path, long precision) {
    GroupDescriptor g = parse_group(group_spec);
    std::vector<Endomorphism> phis;
    for (const auto& spec : endo_specs) phis.push_back(parse_endo(spec, g));
    Verdict v = classify_general(phis, g);
    std::cout << "group: " << g.str() << "\n";
    std::cout << "rin: " << (v.rin ? "true" : "false") << "  lin: " << (v.lin ? "true" : "false")
              << "\n";
    std::size_t widx = 0;
    if (v.certificate) std::cout << describe_certificate(*v.certificate) << "\n";
    if (v.witness) {
        widx = witness_endo_index(phis, g);
        WitnessCheck c = verify_witness(*v.witness, phis[widx], precision);
        std::cout << describe_witness(*v.witness)
                  << (c.ok ? " (re-verified)" : " (RE-VERIFICATION FAILED)") << "\n";
        if (!c.ok) return kExitInputError;
    }
    if (!json_path.empty()) write_json(classification_document(g, phis, v, widx), json_path);
    return v.rin ? kExitOk : kExitNegative;
}

int cmd_witness(const std::string& group_spec, const std::string& endo_spec,
                const std::string& json_path, long precision) {
    GroupDescriptor g = parse_group(group_spec);
    Endomorphism phi = parse_endo(endo_spec, g);
    Verdict v = classify_general({phi}, g);
    if (v.rin) {
        std::cout << "inertial: no witness exists; " << describe_certificate(*v.certificate)
                  << "\n";
        return kExitNegative;
    }
    WitnessCheck c = verify_witness(*v.witness, phi, precision);
    std::cout << describe_witness(*v.witness) << (c.ok ? " (re-verified)" : " (FAILED)") << "\n";
    if (!json_path.empty()) write_json(classification_document(g, {phi}, v, 0), json_path);
    return c.ok ? kExitOk : kExitInputError;
}

Mat named_matrix(const FiniteAbelianGroup& G, const std::string& name) {
    std::size_t n = G.dim();
    if (name == "id") return Mat::identity(n);
    if (name == "swap-cycle") {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, (i + 1) % n) = 1;
        if (!matrix_well_defined(G, m)) throw std::invalid_argument("swap-cycle ill-defined here");
        return m;
    }
    if (name == "shear") {
        for (int variant = 0; variant < 2; ++variant) {
            Mat m = Mat::identity(n);
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if (variant == 0)
                    m(i, i + 1) = 1;
                else
                    m(i + 1, i) = 1;
            }
            if (matrix_well_defined(G, m)) return m;
        }
        throw std::invalid_argument("shear ill-defined on this group");
    }
    throw std::invalid_argument("unknown endomorphism name: " + name +
                                " (try id, swap-cycle, shear, or an endo spec)");
}

Mat oracle_endo(const FiniteAbelianGroup& G, const GroupDescriptor& g, const std::string& spec) {
    if (spec == "id" || spec == "swap-cycle" || spec == "shear") return named_matrix(G, spec);
    return endo_to_matrix(G, parse_endo(spec, g));
}

int cmd_oracle(const std::string& sub, const std::string& group_spec,
               const std::vector<std::string>& endo_specs, long count, unsigned long seed) {
    GroupDescriptor g = parse_group(group_spec);
    FiniteAbelianGroup G = FiniteAbelianGroup::from_descriptor(g);
    if (sub == "subgroups") {
        std::cout << "group: " << g.str() << "\nsubgroups: " << count_subgroups(G) << "\n";
        return kExitOk;
    }
    std::vector<Mat> mats;
    for (const auto& spec : endo_specs) mats.push_back(oracle_endo(G, g, spec));
    if (mats.empty()) {
        std::mt19937 rng(static_cast<std::mt19937::result_type>(seed));
        for (long i = 0; i < count; ++i) mats.push_back(random_endo_matrix(G, rng));
    }
    if (sub == "bounds") {
        auto results = check_closure_bound_batch(G, mats);
        bool all = true;
        long worst_m = 0;
        for (const auto& r : results) {
            all = all && r.holds;
            worst_m = std::max(worst_m, r.m);
        }
        std::cout << "group: " << g.str() << "\nendomorphisms: " << mats.size()
                  << "\nholds: " << (all ? "true" : "false") << "  (max m = " << worst_m << ")\n";
        return all ? kExitOk : kExitNegative;
    }
    if (sub == "fs") {
        Int b = fs_bound(G, mats);
        std::cout << "group: " << g.str() << "\nfs bound m = " << b.str() << "\n";
        return kExitOk;
    }
    throw std::invalid_argument("unknown oracle subcommand: " + sub);
}

int cmd_gallery(const std::string& name) {
    if (name.empty()) {
        for (const auto& n : gallery_names()) std::cout << n << "\n";
        return kExitOk;
    }
    auto [ok, report] = run_gallery_entry(name);
    std::cout << report;
    std::cout << (ok ? "gallery entry passed" : "gallery entry FAILED") << "\n";
    return ok ? kExitOk : kExitNegative;
}

int cmd_verify(const std::string& path, long precision) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "cannot open " << path << "\n";
        return kExitInputError;
    }
    Json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        std::cerr << "invalid JSON: " << e.what() << "\n";
        return kExitInputError;
    }
    std::string err = verify_document(doc, precision);
    if (err.empty()) {
        std::cout << "verification passed\n";
        return kExitOk;
    }
    std::cout << "verification failed: " << err << "\n";
    return kExitNegative;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inertia: decision procedures for inertial endomorphisms of abelian groups"};
    app.require_subcommand(1);
    long precision = kDefaultWitnessK;
    unsigned long seed = 12345;
    app.add_option("--precision", precision, "witness verification depth K")
        ->capture_default_str();
    app.add_option("--seed", seed, "seed for randomized suites")->capture_default_str();

    std::string group_spec, endo_spec, json_path, name, file;
    std::vector<std::string> endo_specs;
    long count = 50;

    auto* classify = app.add_subcommand("classify", "classify a family of endomorphisms");
    classify->add_option("group", group_spec, "group spec, e.g. \"Z(2^inf)+Q[2]\"")->required();
    classify->add_option("endos", endo_specs, "endomorphism specs, e.g. \"mult 2\"")->required();
    classify->add_option("--json", json_path, "write the classification artifact (- = stdout)");

    auto* witness = app.add_subcommand("witness", "emit a verified non-inertiality witness");
    witness->add_option("group", group_spec)->required();
    witness->add_option("endo", endo_spec)->required();
    witness->add_option("--json", json_path, "write the witness artifact (- = stdout)");

    auto* oracle = app.add_subcommand("oracle", "finite ground-truth suites");
    std::string oracle_sub;
    oracle->add_option("sub", oracle_sub, "subgroups | bounds | fs")->required();
    oracle->add_option("group", group_spec, "finite group spec, e.g. \"Z(4)+Z(2)\"")->required();
    oracle->add_option("--endo", endo_specs, "endo spec or name (id, swap-cycle, shear)");
    oracle->add_option("--count", count, "random endomorphisms when --endo is absent")
        ->capture_default_str();

    auto* gallery = app.add_subcommand("gallery", "run a named example construction");
    gallery->add_option("name", name, "entry name (omit to list)");

    auto* verify = app.add_subcommand("verify", "re-validate a JSON artifact");
    verify->add_option("file", file, "artifact path")->required();

    for (auto* sub : {classify, witness, oracle, gallery, verify}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (classify->parsed()) return cmd_classify(group_spec, endo_specs, json_path, precision);
        if (witness->parsed()) return cmd_witness(group_spec, endo_spec, json_path, precision);
        if (oracle->parsed()) return cmd_oracle(oracle_sub, group_spec, endo_specs, count, seed);
        if (gallery->parsed()) return cmd_gallery(name);
        if (verify->parsed()) return cmd_verify(file, precision);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
