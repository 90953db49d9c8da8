// Core data model for multimodal meaning representations: a typed graph of
// events, participants, restrictions and relations, with certainty-weighted
// alternatives and restricted label variables for underspecification.
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semrep {

enum class Errc {
  duplicate_id,
  unknown_id,
  self_reference,
  empty_alternatives,
  cert_out_of_range,
  empty_domain,
  integrity_error,
  size_limit,
  not_ground,
  invalid_count,
  parse_error,
  duplicate_category,
  ambiguous_mapping,
  cap_exceeded,
  index_out_of_range,
  outside_domain,
  kind_mismatch,
  invalid_uri,
  unknown_link_kind,
  invalid_argument,
};

struct Error : std::runtime_error {
  Errc code;
  Error(Errc c, const std::string& what) : std::runtime_error(what), code(c) {}
};

const char* errc_name(Errc c);

enum class NodeKind { event, participant };

std::string_view kind_name(NodeKind k);

// Identifier / category syntax: letter followed by letters, digits, underscores.
bool is_valid_token(std::string_view s);

// True when s begins with a URI scheme ("http:", "file:", …).
bool has_uri_scheme(std::string_view s);

// Shortest decimal form that parses back to the same double (used everywhere a
// number is written out, so output is byte-deterministic).
std::string format_number(double v);
std::optional<double> parse_number(std::string_view s);
std::optional<std::int64_t> parse_integer(std::string_view s);

enum class ValueType { token, text, number, reference };

// A restriction value. The lexical form is what equality, ordering, sorting,
// serialization and denotation all use; the type tag records how the value was
// constructed (reference-typed values take part in identifier renaming and
// serialize as a target attribute).
struct Value {
  ValueType type = ValueType::text;
  std::string lexical;

  static Value token(std::string s) {
    if (!is_valid_token(s))
      throw Error(Errc::invalid_argument, "token value '" + s + "' is not a valid token");
    return {ValueType::token, std::move(s)};
  }
  static Value text(std::string s) { return {ValueType::text, std::move(s)}; }
  static Value number(double v) { return {ValueType::number, format_number(v)}; }
  static Value reference(std::string id) {
    if (!is_valid_token(id))
      throw Error(Errc::invalid_argument, "reference value '" + id + "' is not a valid identifier");
    return {ValueType::reference, std::move(id)};
  }

  friend bool operator==(const Value& a, const Value& b) { return a.lexical == b.lexical; }
  friend bool operator<(const Value& a, const Value& b) { return a.lexical < b.lexical; }
};

struct Restriction {
  std::string category;
  Value value;

  friend bool operator==(const Restriction& a, const Restriction& b) {
    return a.category == b.category && a.value == b.value;
  }
};

enum class LinkKind { domain_model, lower_level };

struct ExternalLink {
  LinkKind kind = LinkKind::domain_model;
  std::string target;                    // URI, never dereferenced
  std::optional<std::string> fragment;   // opaque fragment expression

  friend bool operator==(const ExternalLink&, const ExternalLink&) = default;
};

struct EnvironmentMeta {
  std::optional<std::int64_t> timestamp;  // milliseconds since session epoch
  std::optional<std::string> spatial;     // free text
  friend bool operator==(const EnvironmentMeta&, const EnvironmentMeta&) = default;
};

struct ProcessingMeta {
  std::optional<std::string> producer;
  std::optional<double> confidence;  // in [0,1]
  friend bool operator==(const ProcessingMeta&, const ProcessingMeta&) = default;
};

struct InteractionalMeta {
  std::optional<std::string> speaker;
  std::vector<std::string> addressees;
  friend bool operator==(const InteractionalMeta&, const InteractionalMeta&) = default;
};

// Contextual (administrative) data. Never contributes to denotations.
struct MetaBlock {
  std::optional<EnvironmentMeta> environment;
  std::optional<ProcessingMeta> processing;
  std::optional<InteractionalMeta> interactional;

  bool empty() const { return !environment && !processing && !interactional; }
  friend bool operator==(const MetaBlock&, const MetaBlock&) = default;
};

struct TemporalExtent {
  std::int64_t start = 0;
  std::int64_t end = 0;
  friend bool operator==(const TemporalExtent&, const TemporalExtent&) = default;
};

struct Node {
  std::string id;
  NodeKind kind = NodeKind::event;
  std::vector<Restriction> restrictions;
  std::optional<TemporalExtent> extent;  // events only
  std::vector<ExternalLink> links;
  MetaBlock meta;
  std::vector<std::string> extensions;  // foreign-namespace blobs, verbatim

  friend bool operator==(const Node&, const Node&) = default;
};

struct Relation {
  std::string id;
  std::string source;  // node or label-variable identifier
  std::string target;
  std::vector<Restriction> restrictions;
  std::vector<std::string> extensions;

  friend bool operator==(const Relation&, const Relation&) = default;
};

struct Alternative {
  std::vector<Restriction> bundle;
  double cert = 1.0;  // in [0,1]

  friend bool operator==(const Alternative&, const Alternative&) = default;
};

struct AltGroup {
  std::string id;
  std::string owner;  // node identifier
  std::vector<Alternative> alternatives;  // order is the tie-break order

  friend bool operator==(const AltGroup&, const AltGroup&) = default;
};

struct LabelVariable {
  std::string id;
  std::vector<std::string> domain;  // allowed node instantiations

  friend bool operator==(const LabelVariable&, const LabelVariable&) = default;
};

// A complete representation document; the unit of interchange.
struct SemRep {
  std::string id;
  std::vector<Node> nodes;
  std::vector<Relation> relations;
  std::vector<AltGroup> alt_groups;
  std::vector<LabelVariable> variables;
  MetaBlock meta;
  std::vector<std::string> extensions;

  const Node* find_node(std::string_view id) const;
  Node* find_node(std::string_view id);
  const Relation* find_relation(std::string_view id) const;
  const AltGroup* find_alt_group(std::string_view id) const;
  AltGroup* find_alt_group(std::string_view id);
  const LabelVariable* find_variable(std::string_view id) const;
  bool has_id(std::string_view id) const;  // over all four identifier classes

  friend bool operator==(const SemRep&, const SemRep&) = default;
};

// A fully resolved reading: no alternative groups, no variables.
struct GroundRep {
  SemRep rep;
  double score = 1.0;
};

// The denotation target: ground assertions contributed to an information state.
struct Assertion {
  enum class Tag { kind, restr, rel, temporal };
  Tag tag = Tag::kind;
  std::string subject;   // node id, or relation source for rel
  std::string object;    // relation target (rel only)
  std::string category;  // restr/rel only
  std::string value;     // kind name for kind assertions; lexical value otherwise
  std::int64_t start = 0, end = 0;  // temporal only

  friend auto operator<=>(const Assertion&, const Assertion&) = default;

  static Assertion node_kind(std::string id, NodeKind k);
  static Assertion restr(std::string id, std::string category, std::string value);
  static Assertion rel(std::string source, std::string target, std::string category,
                       std::string value);
  static Assertion temporal(std::string id, std::int64_t start, std::int64_t end);

  std::string str() const;  // one-line rendering, for reports and tests
};

using AssertionSet = std::set<Assertion>;

struct Violation {
  std::string id;       // offending identifier
  std::string rule;     // short rule token, e.g. "dangling-endpoint"
  std::string message;
};

// --- builder operations -----------------------------------------------------
// Documents are values; these mutate under the single-writer contract and
// return generated identifiers where applicable.

std::string add_node(SemRep& doc, NodeKind kind, std::optional<std::string> id = std::nullopt);
void add_restriction(SemRep& doc, std::string_view owner, std::string category, Value value);
std::string add_relation(SemRep& doc, std::string source, std::string target,
                         std::vector<Restriction> restrictions = {},
                         std::optional<std::string> id = std::nullopt);
std::string add_alt_group(SemRep& doc, std::string owner, std::vector<Alternative> alternatives,
                          std::optional<std::string> id = std::nullopt);
void add_variable(SemRep& doc, std::string id, std::vector<std::string> domain);

// Encodes a collectively quantified agent ("three men") as a group participant
// restricted by cardinality / collectivity / memberType, related to the event
// with role=agent. Returns the participant identifier.
std::string encode_collective_quantifier(SemRep& doc, std::string_view event_id,
                                         std::int64_t members_count,
                                         std::string member_category);

// --- integrity, canonical form, isomorphism, denotation ---------------------

std::vector<Violation> check_integrity(const SemRep& doc);

// Deterministic interchange form: restrictions sorted by (category, value),
// relations by (source, target, first role value), alt groups by owner
// position; node / alternative / domain order is meaningful and kept.
// Idempotent. Throws Errc::integrity_error on violations.
SemRep canonicalize(SemRep doc);

bool canonical_equal(const SemRep& a, const SemRep& b);

inline constexpr std::size_t kIsomorphismNodeCap = 50;

// Identity up to identifier renaming (document id and collection order are not
// significant). Backtracking search; throws Errc::size_limit above the cap.
bool isomorphic(const SemRep& a, const SemRep& b, std::size_t node_cap = kIsomorphismNodeCap);

// Formal denotation of a ground reading. Throws Errc::not_ground if alt groups
// or variables remain. MetaBlocks contribute nothing.
AssertionSet denote(const GroundRep& g);

}  // namespace semrep
