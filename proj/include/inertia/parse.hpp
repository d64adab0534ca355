#pragma once

#include <string>

#include "inertia/endo.hpp"
#include "inertia/group.hpp"

namespace inertia {

// Text grammar for group descriptors:
//   atom:  Z | Z(p) | Z(p^e) | Z(p^inf) | Q | Q[p1,p2,...]
//   term:  atom [^n | ^w]
//   spec:  term + term + ...   or   fg{r11 r12; r21 r22; ...}
// fg{...} builds a presented group from an integer relation matrix and must
// be the whole spec. Throws std::invalid_argument with the offending offset.
GroupDescriptor parse_group(const std::string& text);

// Text grammar for structured endomorphisms over a parsed group:
//   mult R                       multiplication by the rational R
//   id | zero                    shorthands
//   part + part + ... where part is one of
//     blocks{S: scalar; S: local(p: scalar); ...}   (block{...} also accepted)
//        S = slot list, 1-based, e.g. "1,2" or "slots=1,2"
//     matrix{(s,c)->(s,c): R; ...}                  (1-based slot, 0-based copy)
//     finitary{mod=M; w=(s,c):R,...; target=(s,c):R,...}
// Throws std::invalid_argument with the offending offset.
Endomorphism parse_endo(const std::string& text, const GroupDescriptor& g);

// Rational literal: "3", "-5", "3/2".
Rat parse_rat(const std::string& text);

}  // namespace inertia
