#pragma once

#include <json.hpp>

#include "inertia/classifier.hpp"
#include "inertia/group.hpp"
#include "inertia/witness.hpp"

namespace inertia {

// Deterministic JSON serialization. All integers are rendered as decimal
// strings (rationals as "m" or "m/n") so arbitrary-precision values survive
// the round trip; field order is fixed by construction (ordered_json), so
// identical inputs produce byte-identical output.
using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json group_to_json(const GroupDescriptor& g);
GroupDescriptor group_from_json(const Json& j);

Json element_to_json(const Element& e);
Element element_from_json(const Json& j, const GroupDescriptor& g);

Json handle_to_json(const SubgroupHandle& h);
SubgroupHandle handle_from_json(const Json& j, const GroupDescriptor& g);

Json endo_to_json(const Endomorphism& phi);
Endomorphism endo_from_json(const Json& j, const GroupDescriptor& g);

Json certificate_to_json(const InertialCertificate& c);
InertialCertificate certificate_from_json(const Json& j, const GroupDescriptor& g);

Json witness_to_json(const NonInertialWitness& w);
NonInertialWitness witness_from_json(const Json& j);

// Top-level artifact with schemaVersion: group, endomorphisms, verdict and
// the attached certificate or witness ("witnessEndo" names the member of the
// family the witness refutes).
Json classification_document(const GroupDescriptor& g, const std::vector<Endomorphism>& phis,
                             const Verdict& v, std::size_t witness_endo = 0);

// Independent re-validation of a parsed artifact (certificate conditions or
// witness growth); returns an empty string on success, else a diagnostic.
std::string verify_document(const Json& doc, long precision);

}  // namespace inertia
