// Fusion of partial modality-specific documents: node unification (structure
// sharing), restriction/alternative reconciliation with conflict detection,
// and incremental assimilation sessions.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "semrep/model.hpp"
#include "semrep/registry.hpp"

namespace semrep {

struct Conflict {
  std::string owner;     // identifier the clash is anchored to
  std::string category;  // category name, or "extent" / the group's categories
  std::string left;      // rendering of the left-hand information
  std::string right;
  std::string rule;      // single-value | extent | alt-intersection

  std::string str() const;
};

struct ConflictReport {
  std::vector<Conflict> conflicts;
  bool empty() const { return conflicts.empty(); }
};

// Cross-document co-reference assertions (left node id, right node id);
// injective on both sides.
struct Correspondence {
  std::vector<std::pair<std::string, std::string>> pairs;
};

struct MergeResult {
  std::optional<SemRep> doc;          // engaged exactly when conflicts is empty
  ConflictReport conflicts;
  std::vector<std::string> warnings;  // metadata disagreements and the like

  bool ok() const { return doc.has_value(); }
};

// Collapses node b into node a: restrictions are unioned (deduplicated), all
// references to b are redirected to a, groups owned by b are re-owned.
// Conflicts (never exceptions): a registry-declared single-valued category
// with different ground values on the two nodes, or two differing temporal
// extents. Throws Errc::unknown_id / Errc::kind_mismatch.
MergeResult unify_nodes(SemRep doc, const std::string& a, const std::string& b,
                        const Registry& reg);

// Disjoint union (right-hand ids renamed with the "_m<step>" suffix on
// collision), unification per correspondence pair, then alternative
// reconciliation: groups over the same category set on corresponded nodes are
// intersected bundle-wise with certs multiplied; an empty intersection is a
// conflict. Atomic — either a full document or a report.
MergeResult merge(const SemRep& a, const SemRep& b, const Correspondence& c, const Registry& reg,
                  std::size_t step = 1);

struct FusionSession {
  struct Entry {
    std::string doc_id;
    std::int64_t timestamp = 0;  // the document's environment time, else assimilation time
  };
  SemRep current;
  std::vector<Entry> history;
};

// The timestamp a history entry for `d` gets: the document's environment
// time when present, otherwise `now`, otherwise the wall clock (ms).
std::int64_t assimilation_timestamp(const SemRep& d, std::optional<std::int64_t> now = std::nullopt);

// merge(current, d, …) with the session's step counter; on success the session
// advances and the history records the document. On conflict the session is
// untouched. `now` overrides the fallback timestamp (tests want determinism).
MergeResult assimilate(FusionSession& s, const SemRep& d, const Correspondence& c,
                       const Registry& reg, std::optional<std::int64_t> now = std::nullopt);

}  // namespace semrep
