#pragma once

#include <string>
#include <vector>

#include "inertia/classifier.hpp"

namespace inertia {

// Named example constructions used as golden anchors by the tests and the
// CLI. Running the classifier on (group, endos) must reproduce `expected_*`
// exactly.
struct GalleryEntry {
    std::string name;
    std::string anchor;  // one-line description of the construction
    GroupDescriptor group;
    std::vector<Endomorphism> endos;
    bool expected_rin = false;
    bool expected_lin = false;
};

// A = Q^omega, phi = x2: RIN but not LIN; the inverse automorphism x1/2 is
// LIN but not RIN.
GalleryEntry q_omega_doubling();

// A = Z(p^e)^omega + Z(p^inf)^d, phi = identity on the bounded part and
// inversion on the divisible part: inertial both ways, periodic (phi^2 = 1),
// yet not finitary. Requires an odd prime.
GalleryEntry critical_id_inversion(const Int& p, long d, long e);

// Truncated stabilizer model: H = <v, d_p : p <= P> with p*d_p = v + t_p and
// t_p of order p, presented by the relation rows p^2*d_p - p*v = 0. The
// builder sigma(s) fixes v and T pointwise, sends d_p to d_p + s_p*t_p, and
// so stabilizes the series 0 <= V+T <= H with finite image of sigma - id.
struct PropositionAModel {
    GalleryEntry entry;  // group + sigma(1,...,1), expected rin = lin = true
    std::vector<Int> primes;
    Element v;
    std::vector<Element> d;  // one per prime
    std::vector<Element> t;  // t_p = p*d_p - v
    SubgroupHandle vt;       // the stabilized series member V + T

    // Coefficients mod p per prime (size = primes.size()).
    Endomorphism sigma(const std::vector<Int>& s) const;
};
PropositionAModel proposition_a(const Int& P);

// Registered entry names and a self-check runner for the CLI: re-runs the
// classifier and the entry-specific invariants, returning (pass, report).
std::vector<std::string> gallery_names();
std::pair<bool, std::string> run_gallery_entry(const std::string& name);

}  // namespace inertia
