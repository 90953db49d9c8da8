// Underspecification semantics: counting, enumerating, scoring, and
// monotonically resolving the readings induced by alternative groups and
// label variables.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "semrep/model.hpp"

namespace semrep {

inline constexpr std::size_t kDefaultReadingCap = 10000;

// Sentinel for counts too large to represent.
inline constexpr std::uint64_t kCountOverflow = UINT64_MAX;

struct ReadingSet {
  std::vector<GroundRep> readings;
  std::string source_id;
  bool exhaustive = true;  // false when the cap cut enumeration short
};

// Product of group sizes times the number of admissible variable bindings,
// computed without materializing readings; saturates at kCountOverflow.
// Throws Errc::integrity_error.
std::uint64_t reading_count(const SemRep& doc);

// One ground reading per combination of alternatives and bindings, in
// lexicographic order (groups then variables in document order, the last
// factor varying fastest). Chosen bundles are inlined into their owners;
// variables are substituted away. score = product of chosen certs.
ReadingSet enumerate_readings(const SemRep& doc, std::size_t cap = kDefaultReadingCap);

// Highest-scoring reading; ties go to the earliest in enumeration order.
// Throws Errc::cap_exceeded when the document has more than `cap` readings.
GroundRep best_reading(const SemRep& doc, std::size_t cap = kDefaultReadingCap);

// Narrows a group to the single kept alternative (0-based index). The group
// stays behind as the audit trail of the resolution.
SemRep prune(SemRep doc, std::string_view group_id, std::size_t keep);

// Instantiates a variable with a node from its domain: endpoints are
// substituted and the declaration is removed.
SemRep bind(SemRep doc, std::string_view variable_id, std::string_view node_id);

}  // namespace semrep
