// Python bindings. The surface mirrors the CLI: textual group/endomorphism
// grammars in, JSON artifacts out, so Python callers share one schema with
// the command-line tools.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "inertia/classifier.hpp"
#include "inertia/gallery.hpp"
#include "inertia/json_io.hpp"
#include "inertia/parse.hpp"
#include "inertia/witness.hpp"

namespace py = pybind11;
using namespace inertia;

namespace {

std::vector<Endomorphism> parse_family(const std::vector<std::string>& specs,
                                       const GroupDescriptor& g) {
    if (specs.empty()) throw std::invalid_argument("family must be non-empty");
    std::vector<Endomorphism> phis;
    phis.reserve(specs.size());
    for (const auto& s : specs) phis.push_back(parse_endo(s, g));
    return phis;
}

// Index of the family member the witness refutes: the first one that fails
// on its own (the family verdict is the conjunction of the singles).
std::size_t witness_endo_index(const std::vector<Endomorphism>& phis,
                               const GroupDescriptor& g) {
    for (std::size_t i = 0; i < phis.size(); ++i)
        if (!classify_general({phis[i]}, g).rin) return i;
    return 0;
}

}  // namespace

PYBIND11_MODULE(_inertia, m) {
    m.doc() =
        "Classifier for inertial endomorphisms of abelian groups: decides "
        "RIN (|(\xcf\x86X+X)/X| finite for every subgroup X) and LIN "
        "(|X/(X\xe2\x88\xa9\xcf\x86X)| finite), with certificates and "
        "refutation witnesses serialized as JSON.";

    m.def(
        "classify",
        [](const std::string& group, const std::vector<std::string>& endos) {
            GroupDescriptor g = parse_group(group);
            auto phis = parse_family(endos, g);
            Verdict v = classify_general(phis, g);
            Json doc = classification_document(g, phis, v,
                                               v.rin ? 0 : witness_endo_index(phis, g));
            py::dict out;
            out["rin"] = v.rin;
            out["lin"] = v.lin;
            out["document"] = doc.dump(2);
            return out;
        },
        py::arg("group"), py::arg("endos"),
        "Classify a family of endomorphisms on a group. Returns a dict with "
        "'rin', 'lin', and 'document' (the JSON artifact as a string, "
        "carrying the certificate or witness).");

    m.def(
        "verify",
        [](const std::string& document, long precision) {
            Json doc = Json::parse(document);
            return verify_document(doc, precision);
        },
        py::arg("document"), py::arg("precision") = kDefaultWitnessK,
        "Re-validate a JSON artifact (certificate conditions or witness "
        "growth up to the given precision). Returns '' on success, else a "
        "diagnostic.");

    m.def(
        "witness_sections",
        [](const std::string& group, const std::string& endo, long k) {
            GroupDescriptor g = parse_group(group);
            Endomorphism phi = parse_endo(endo, g);
            Verdict v = classify_general({phi}, g);
            py::dict out;
            out["rin"] = v.rin;
            if (!v.rin) {
                WitnessCheck c = verify_witness(*v.witness, phi, g, k);
                out["verified"] = c.ok;
                std::vector<std::string> sections;
                sections.reserve(c.sections.size());
                for (const auto& s : c.sections) sections.push_back(s.str());
                out["sections"] = sections;
            }
            return out;
        },
        py::arg("group"), py::arg("endo"), py::arg("k") = kDefaultWitnessK,
        "Classify a single endomorphism and, when it is not RIN, replay the "
        "witness chain up to depth k, returning the measured section sizes "
        "as decimal strings.");

    m.def("gallery_names", &gallery_names,
          "Names of the built-in worked examples.");

    m.def(
        "run_gallery",
        [](const std::string& name) { return run_gallery_entry(name); },
        py::arg("name"),
        "Run one built-in example; returns (ok, report).");

    m.def(
        "group_to_json",
        [](const std::string& group) { return group_to_json(parse_group(group)).dump(2); },
        py::arg("group"),
        "Parse a group expression and return its canonical JSON form.");

    m.attr("DEFAULT_PRECISION") = py::int_(kDefaultWitnessK);
    m.attr("SCHEMA_VERSION") = py::int_(kSchemaVersion);
}
