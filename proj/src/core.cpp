#include "semrep/model.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace semrep {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::unknown_id: return "UnknownId";
    case Errc::self_reference: return "SelfReference";
    case Errc::empty_alternatives: return "EmptyAlternatives";
    case Errc::cert_out_of_range: return "CertOutOfRange";
    case Errc::empty_domain: return "EmptyDomain";
    case Errc::integrity_error: return "IntegrityError";
    case Errc::size_limit: return "SizeLimit";
    case Errc::not_ground: return "NotGround";
    case Errc::invalid_count: return "InvalidCount";
    case Errc::parse_error: return "ParseError";
    case Errc::duplicate_category: return "DuplicateCategory";
    case Errc::ambiguous_mapping: return "AmbiguousMapping";
    case Errc::cap_exceeded: return "CapExceeded";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::outside_domain: return "OutsideDomain";
    case Errc::kind_mismatch: return "KindMismatch";
    case Errc::invalid_uri: return "InvalidUri";
    case Errc::unknown_link_kind: return "UnknownLinkKind";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Error";
}

std::string_view kind_name(NodeKind k) {
  return k == NodeKind::event ? std::string_view("event") : std::string_view("participant");
}

bool is_valid_token(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  auto alnum = [&](char c) { return alpha(c) || (c >= '0' && c <= '9') || c == '_'; };
  if (!alpha(s[0])) return false;
  for (char c : s.substr(1))
    if (!alnum(c)) return false;
  return true;
}

std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  assert(ec == std::errc());
  return std::string(buf, p);
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_integer(std::string_view s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

// --- lookups -----------------------------------------------------------------

const Node* SemRep::find_node(std::string_view id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

Node* SemRep::find_node(std::string_view id) {
  return const_cast<Node*>(static_cast<const SemRep*>(this)->find_node(id));
}

const Relation* SemRep::find_relation(std::string_view id) const {
  for (const auto& r : relations)
    if (r.id == id) return &r;
  return nullptr;
}

const AltGroup* SemRep::find_alt_group(std::string_view id) const {
  for (const auto& g : alt_groups)
    if (g.id == id) return &g;
  return nullptr;
}

AltGroup* SemRep::find_alt_group(std::string_view id) {
  return const_cast<AltGroup*>(static_cast<const SemRep*>(this)->find_alt_group(id));
}

const LabelVariable* SemRep::find_variable(std::string_view id) const {
  for (const auto& v : variables)
    if (v.id == id) return &v;
  return nullptr;
}

bool SemRep::has_id(std::string_view id) const {
  return find_node(id) || find_relation(id) || find_alt_group(id) || find_variable(id);
}

// --- builder operations ------------------------------------------------------

static std::string generate_id(const SemRep& doc, char prefix) {
  for (std::size_t k = 1;; ++k) {
    std::string candidate = prefix + std::to_string(k);
    if (!doc.has_id(candidate)) return candidate;
  }
}

static void require_token(std::string_view what, std::string_view s) {
  if (!is_valid_token(s))
    throw Error(Errc::invalid_argument, std::string(what) + " '" + std::string(s) +
                                            "' is not a valid token");
}

std::string add_node(SemRep& doc, NodeKind kind, std::optional<std::string> id) {
  std::string nid;
  if (id) {
    require_token("identifier", *id);
    if (doc.has_id(*id)) throw Error(Errc::duplicate_id, "identifier '" + *id + "' already used");
    nid = *id;
  } else {
    nid = generate_id(doc, 'n');
  }
  Node n;
  n.id = nid;
  n.kind = kind;
  doc.nodes.push_back(std::move(n));
  return nid;
}

void add_restriction(SemRep& doc, std::string_view owner, std::string category, Value value) {
  require_token("category", category);
  if (Node* n = doc.find_node(owner)) {
    n->restrictions.push_back({std::move(category), std::move(value)});
    return;
  }
  for (auto& r : doc.relations)
    if (r.id == owner) {
      r.restrictions.push_back({std::move(category), std::move(value)});
      return;
    }
  throw Error(Errc::unknown_id, "no node or relation '" + std::string(owner) + "'");
}

std::string add_relation(SemRep& doc, std::string source, std::string target,
                         std::vector<Restriction> restrictions, std::optional<std::string> id) {
  std::string rid;
  if (id) {
    require_token("identifier", *id);
    if (doc.has_id(*id)) throw Error(Errc::duplicate_id, "identifier '" + *id + "' already used");
    rid = *id;
  } else {
    rid = generate_id(doc, 'r');
  }
  if (source == rid || target == rid)
    throw Error(Errc::self_reference, "relation '" + rid + "' uses itself as an endpoint");
  for (const std::string* ep : {&source, &target})
    if (!doc.find_node(*ep) && !doc.find_variable(*ep))
      throw Error(Errc::unknown_id, "endpoint '" + *ep + "' does not resolve to a node or variable");
  Relation r;
  r.id = rid;
  r.source = std::move(source);
  r.target = std::move(target);
  r.restrictions = std::move(restrictions);
  doc.relations.push_back(std::move(r));
  return rid;
}

std::string add_alt_group(SemRep& doc, std::string owner, std::vector<Alternative> alternatives,
                          std::optional<std::string> id) {
  if (!doc.find_node(owner))
    throw Error(Errc::unknown_id, "no node '" + owner + "' to own the group");
  if (alternatives.empty())
    throw Error(Errc::empty_alternatives, "alternative group must offer at least one alternative");
  for (const auto& alt : alternatives)
    if (!(alt.cert >= 0.0 && alt.cert <= 1.0))
      throw Error(Errc::cert_out_of_range,
                  "certainty " + format_number(alt.cert) + " outside [0,1]");
  std::string gid;
  if (id) {
    require_token("identifier", *id);
    if (doc.has_id(*id)) throw Error(Errc::duplicate_id, "identifier '" + *id + "' already used");
    gid = *id;
  } else {
    gid = generate_id(doc, 'a');
  }
  AltGroup g;
  g.id = gid;
  g.owner = std::move(owner);
  g.alternatives = std::move(alternatives);
  doc.alt_groups.push_back(std::move(g));
  return gid;
}

void add_variable(SemRep& doc, std::string id, std::vector<std::string> domain) {
  require_token("identifier", id);
  if (doc.has_id(id)) throw Error(Errc::duplicate_id, "identifier '" + id + "' already used");
  if (domain.empty()) throw Error(Errc::empty_domain, "variable '" + id + "' has an empty domain");
  std::unordered_set<std::string_view> seen;
  for (const auto& m : domain) {
    if (!doc.find_node(m))
      throw Error(Errc::unknown_id, "domain member '" + m + "' does not resolve to a node");
    if (!seen.insert(m).second)
      throw Error(Errc::duplicate_id, "domain of '" + id + "' lists '" + m + "' twice");
  }
  LabelVariable v;
  v.id = std::move(id);
  v.domain = std::move(domain);
  doc.variables.push_back(std::move(v));
}

std::string encode_collective_quantifier(SemRep& doc, std::string_view event_id,
                                         std::int64_t members_count,
                                         std::string member_category) {
  const Node* ev = doc.find_node(event_id);
  if (!ev || ev->kind != NodeKind::event)
    throw Error(Errc::unknown_id, "no event '" + std::string(event_id) + "'");
  if (members_count < 1)
    throw Error(Errc::invalid_count,
                "group size " + std::to_string(members_count) + " is below 1");
  std::string pid = add_node(doc, NodeKind::participant);
  add_restriction(doc, pid, "cardinality", Value::number(double(members_count)));
  add_restriction(doc, pid, "collectivity", Value::token("collective"));
  add_restriction(doc, pid, "memberType", Value::token(std::move(member_category)));
  add_relation(doc, pid, std::string(event_id), {{"role", Value::token("agent")}});
  return pid;
}

// --- integrity ---------------------------------------------------------------

bool has_uri_scheme(std::string_view s) {
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (s.empty() || !alpha(s[0])) return false;
  std::size_t i = 1;
  while (i < s.size() && (alpha(s[i]) || (s[i] >= '0' && s[i] <= '9') || s[i] == '+' ||
                          s[i] == '-' || s[i] == '.'))
    ++i;
  return i < s.size() && s[i] == ':';
}

namespace {

// Accepts a URI with an explicit scheme ("http://...", "file:...") or a
// bare resource with a fragment locator ("speech.wav#t=1.2,1.9"). Plain words
// with neither are rejected — they are almost always mistakes.
bool plausible_uri(const std::string& s) {
  return has_uri_scheme(s) || s.find('#') != std::string::npos;
}

bool cert_ok(double c) { return c >= 0.0 && c <= 1.0; }  // false for NaN

}  // namespace

std::vector<Violation> check_integrity(const SemRep& doc) {
  std::vector<Violation> out;
  auto flag = [&](const std::string& id, const char* rule, std::string msg) {
    out.push_back({id, rule, std::move(msg)});
  };

  std::unordered_set<std::string_view> ids;
  auto claim = [&](const std::string& id, const char* what) {
    if (!is_valid_token(id))
      flag(id, "bad-identifier", std::string(what) + " identifier '" + id + "' is not a token");
    if (!ids.insert(id).second)
      flag(id, "duplicate-id", "identifier '" + id + "' is used more than once");
  };
  for (const auto& n : doc.nodes) claim(n.id, "node");
  for (const auto& r : doc.relations) claim(r.id, "relation");
  for (const auto& g : doc.alt_groups) claim(g.id, "alternative group");
  for (const auto& v : doc.variables) claim(v.id, "variable");

  auto check_meta = [&](const std::string& id, const MetaBlock& m) {
    if (m.processing && m.processing->confidence && !cert_ok(*m.processing->confidence))
      flag(id, "confidence-range",
           "confidence " + format_number(*m.processing->confidence) + " outside [0,1]");
  };
  auto check_restrictions = [&](const std::string& id, const std::vector<Restriction>& rs) {
    for (const auto& r : rs)
      if (!is_valid_token(r.category))
        flag(id, "bad-category", "restriction category '" + r.category + "' is not a token");
  };

  for (const auto& n : doc.nodes) {
    check_restrictions(n.id, n.restrictions);
    if (n.extent) {
      if (n.kind != NodeKind::event)
        flag(n.id, "extent-on-participant",
             "participant '" + n.id + "' carries a temporal extent");
      if (n.extent->start > n.extent->end)
        flag(n.id, "extent-order", "extent of '" + n.id + "' ends before it starts");
    }
    for (const auto& l : n.links)
      if (!plausible_uri(l.target) && !l.fragment)
        flag(n.id, "bad-link", "link target '" + l.target + "' is not a URI");
    check_meta(n.id, n.meta);
  }

  for (const auto& r : doc.relations) {
    check_restrictions(r.id, r.restrictions);
    for (const std::string* ep : {&r.source, &r.target}) {
      if (*ep == r.id) {
        flag(r.id, "self-reference", "relation '" + r.id + "' uses itself as an endpoint");
        continue;
      }
      if (!doc.find_node(*ep) && !doc.find_variable(*ep))
        flag(r.id, "dangling-reference",
             "relation '" + r.id + "' endpoint '" + *ep + "' does not resolve");
    }
  }

  for (const auto& g : doc.alt_groups) {
    if (!doc.find_node(g.owner))
      flag(g.id, "dangling-reference",
           "group '" + g.id + "' owner '" + g.owner + "' does not resolve to a node");
    if (g.alternatives.empty())
      flag(g.id, "empty-alternatives", "group '" + g.id + "' offers no alternatives");
    for (const auto& alt : g.alternatives) {
      check_restrictions(g.id, alt.bundle);
      if (!cert_ok(alt.cert))
        flag(g.id, "cert-range",
             "certainty " + format_number(alt.cert) + " in group '" + g.id + "' outside [0,1]");
    }
  }

  for (const auto& v : doc.variables) {
    if (v.domain.empty())
      flag(v.id, "empty-domain", "variable '" + v.id + "' has an empty domain");
    std::unordered_set<std::string_view> seen;
    for (const auto& m : v.domain) {
      if (!doc.find_node(m))
        flag(v.id, "dangling-reference",
             "variable '" + v.id + "' domain member '" + m + "' does not resolve to a node");
      if (!seen.insert(m).second)
        flag(v.id, "duplicate-domain", "variable '" + v.id + "' lists '" + m + "' twice");
    }
  }

  check_meta(doc.id.empty() ? std::string("document") : doc.id, doc.meta);
  return out;
}

// --- canonical form ----------------------------------------------------------

namespace {

bool restriction_less(const Restriction& a, const Restriction& b) {
  if (a.category != b.category) return a.category < b.category;
  return a.value.lexical < b.value.lexical;
}

// Unambiguous joined form of a sorted restriction list, for sort keys.
std::string restriction_key(const std::vector<Restriction>& rs) {
  std::string key;
  for (const auto& r : rs) {
    key += std::to_string(r.category.size());
    key += ':';
    key += r.category;
    key += std::to_string(r.value.lexical.size());
    key += ':';
    key += r.value.lexical;
  }
  return key;
}

std::string first_role_value(const std::vector<Restriction>& rs) {
  for (const auto& r : rs)
    if (r.category == "role") return r.value.lexical;
  return {};
}

}  // namespace

SemRep canonicalize(SemRep doc) {
  auto violations = check_integrity(doc);
  if (!violations.empty())
    throw Error(Errc::integrity_error,
                "document has " + std::to_string(violations.size()) +
                    " integrity violation(s); first: " + violations.front().message);

  for (auto& n : doc.nodes)
    std::stable_sort(n.restrictions.begin(), n.restrictions.end(), restriction_less);
  for (auto& r : doc.relations)
    std::stable_sort(r.restrictions.begin(), r.restrictions.end(), restriction_less);
  for (auto& g : doc.alt_groups)
    for (auto& alt : g.alternatives)
      std::stable_sort(alt.bundle.begin(), alt.bundle.end(), restriction_less);

  // Relations in a full deterministic order so any insertion order converges.
  std::stable_sort(doc.relations.begin(), doc.relations.end(),
                   [](const Relation& a, const Relation& b) {
                     if (a.source != b.source) return a.source < b.source;
                     if (a.target != b.target) return a.target < b.target;
                     std::string ra = first_role_value(a.restrictions);
                     std::string rb = first_role_value(b.restrictions);
                     if (ra != rb) return ra < rb;
                     std::string ka = restriction_key(a.restrictions);
                     std::string kb = restriction_key(b.restrictions);
                     if (ka != kb) return ka < kb;
                     return a.id < b.id;
                   });

  // Groups follow their owners' document positions.
  std::unordered_map<std::string_view, std::size_t> node_pos;
  for (std::size_t i = 0; i < doc.nodes.size(); ++i) node_pos[doc.nodes[i].id] = i;
  std::stable_sort(doc.alt_groups.begin(), doc.alt_groups.end(),
                   [&](const AltGroup& a, const AltGroup& b) {
                     std::size_t pa = node_pos.at(a.owner);
                     std::size_t pb = node_pos.at(b.owner);
                     if (pa != pb) return pa < pb;
                     return a.id < b.id;
                   });
  return doc;
}

bool canonical_equal(const SemRep& a, const SemRep& b) {
  return canonicalize(a) == canonicalize(b);
}

// --- isomorphism -------------------------------------------------------------

namespace {

using IdMap = std::unordered_map<std::string, std::string>;

// Renames identifier-typed restriction values through the (partial) mapping;
// values that point outside the mapping are kept verbatim.
std::vector<Restriction> mapped_restrictions(std::vector<Restriction> rs, const IdMap& map) {
  for (auto& r : rs)
    if (r.value.type == ValueType::reference) {
      auto it = map.find(r.value.lexical);
      if (it != map.end()) r.value.lexical = it->second;
    }
  std::sort(rs.begin(), rs.end(), restriction_less);
  return rs;
}

std::string extensions_key(const std::vector<std::string>& exts) {
  std::string key;
  for (const auto& e : exts) {
    key += std::to_string(e.size());
    key += ':';
    key += e;
  }
  return key;
}

// Mapping-independent part of a node's content, used to prune candidates.
std::string node_signature(const SemRep& doc, const Node& n) {
  std::string sig;
  sig += n.kind == NodeKind::event ? 'e' : 'p';
  if (n.extent) {
    sig += 't';
    sig += std::to_string(n.extent->start);
    sig += ',';
    sig += std::to_string(n.extent->end);
  }
  std::vector<Restriction> plain;
  std::vector<std::string> ref_cats;
  for (const auto& r : n.restrictions)
    (r.value.type == ValueType::reference ? (void)ref_cats.push_back(r.category)
                                          : (void)plain.push_back(r));
  std::sort(plain.begin(), plain.end(), restriction_less);
  std::sort(ref_cats.begin(), ref_cats.end());
  sig += '|';
  sig += restriction_key(plain);
  sig += '|';
  for (const auto& c : ref_cats) {
    sig += c;
    sig += ',';
  }
  sig += '|';
  for (const auto& l : n.links) {
    sig += l.kind == LinkKind::domain_model ? 'd' : 'l';
    sig += l.target;
    if (l.fragment) {
      sig += '#';
      sig += *l.fragment;
    }
    sig += ',';
  }
  sig += '|';
  sig += extensions_key(n.extensions);
  sig += '|';
  if (n.meta.environment) {
    sig += 'E';
    if (n.meta.environment->timestamp) sig += std::to_string(*n.meta.environment->timestamp);
    sig += ';';
    if (n.meta.environment->spatial) sig += *n.meta.environment->spatial;
  }
  if (n.meta.processing) {
    sig += 'P';
    if (n.meta.processing->producer) sig += *n.meta.processing->producer;
    sig += ';';
    if (n.meta.processing->confidence) sig += format_number(*n.meta.processing->confidence);
  }
  if (n.meta.interactional) {
    sig += 'I';
    if (n.meta.interactional->speaker) sig += *n.meta.interactional->speaker;
    sig += ';';
    for (const auto& a : n.meta.interactional->addressees) {
      sig += a;
      sig += ',';
    }
  }
  // Degrees distinguish structurally different nodes early.
  std::size_t out_deg = 0, in_deg = 0, owned = 0;
  for (const auto& r : doc.relations) {
    if (r.source == n.id) ++out_deg;
    if (r.target == n.id) ++in_deg;
  }
  for (const auto& g : doc.alt_groups)
    if (g.owner == n.id) ++owned;
  sig += '|';
  sig += std::to_string(out_deg);
  sig += '/';
  sig += std::to_string(in_deg);
  sig += '/';
  sig += std::to_string(owned);
  return sig;
}

std::string relation_content_key(const Relation& r, const IdMap& map) {
  std::string src = r.source, tgt = r.target;
  if (auto it = map.find(src); it != map.end()) src = it->second;
  if (auto it = map.find(tgt); it != map.end()) tgt = it->second;
  std::string key = std::to_string(src.size()) + ':' + src + std::to_string(tgt.size()) + ':' +
                    tgt + '|' + restriction_key(mapped_restrictions(r.restrictions, map)) + '|' +
                    extensions_key(r.extensions);
  return key;
}

// Budget keys for the search prune must stay stable while the mapping is only
// partially built, so identifier-typed restriction values contribute their
// category alone; verify_mapping compares the full values afterwards.
std::string relation_prune_key(const Relation& r, const IdMap& map) {
  std::string src = r.source, tgt = r.target;
  if (auto it = map.find(src); it != map.end()) src = it->second;
  if (auto it = map.find(tgt); it != map.end()) tgt = it->second;
  std::vector<Restriction> plain;
  std::vector<std::string> ref_cats;
  for (const auto& rst : r.restrictions)
    (rst.value.type == ValueType::reference ? (void)ref_cats.push_back(rst.category)
                                            : (void)plain.push_back(rst));
  std::sort(plain.begin(), plain.end(), restriction_less);
  std::sort(ref_cats.begin(), ref_cats.end());
  std::string key = std::to_string(src.size()) + ':' + src + std::to_string(tgt.size()) + ':' +
                    tgt + '|' + restriction_key(plain) + '|';
  for (const auto& c : ref_cats) {
    key += c;
    key += ',';
  }
  key += '|';
  key += extensions_key(r.extensions);
  return key;
}

std::string group_content_key(const AltGroup& g, const IdMap& map) {
  std::string owner = g.owner;
  if (auto it = map.find(owner); it != map.end()) owner = it->second;
  std::string key = std::to_string(owner.size()) + ':' + owner;
  for (const auto& alt : g.alternatives) {
    key += '|';
    key += format_number(alt.cert);
    key += '@';
    key += restriction_key(mapped_restrictions(alt.bundle, map));
  }
  return key;
}

// Full definition check for a complete candidate bijection over node and
// variable identifiers; the search below only ever calls this on mappings
// whose cheap prunes all passed.
bool verify_mapping(const SemRep& a, const SemRep& b, const IdMap& map) {
  IdMap empty;
  for (const auto& an : a.nodes) {
    const Node* bn = b.find_node(map.at(an.id));
    if (!bn) return false;
    if (an.kind != bn->kind || an.extent != bn->extent || an.links != bn->links ||
        an.meta != bn->meta || an.extensions != bn->extensions)
      return false;
    if (mapped_restrictions(an.restrictions, map) != mapped_restrictions(bn->restrictions, empty))
      return false;
  }
  for (const auto& av : a.variables) {
    const LabelVariable* bv = b.find_variable(map.at(av.id));
    if (!bv || av.domain.size() != bv->domain.size()) return false;
    for (std::size_t i = 0; i < av.domain.size(); ++i)
      if (map.at(av.domain[i]) != bv->domain[i]) return false;
  }
  std::multiset<std::string> rel_a, rel_b, grp_a, grp_b;
  for (const auto& r : a.relations) rel_a.insert(relation_content_key(r, map));
  for (const auto& r : b.relations) rel_b.insert(relation_content_key(r, empty));
  if (rel_a != rel_b) return false;
  for (const auto& g : a.alt_groups) grp_a.insert(group_content_key(g, map));
  for (const auto& g : b.alt_groups) grp_b.insert(group_content_key(g, empty));
  if (grp_a != grp_b) return false;
  return a.meta == b.meta && a.extensions == b.extensions;
}

struct IsoSearch {
  const SemRep& a;
  const SemRep& b;
  IdMap forward;                         // a id -> b id (nodes and variables)
  std::unordered_set<std::string> used;  // claimed b ids
  std::map<std::string, std::size_t> rel_budget;  // b relation key -> remaining capacity

  // Relations of `a` indexed by endpoint, to prune as soon as both ends map.
  std::unordered_map<std::string, std::vector<const Relation*>> touching;

  explicit IsoSearch(const SemRep& a_, const SemRep& b_) : a(a_), b(b_) {
    IdMap empty;
    for (const auto& r : b.relations) ++rel_budget[relation_prune_key(r, empty)];
    for (const auto& r : a.relations) {
      touching[r.source].push_back(&r);
      if (r.target != r.source) touching[r.target].push_back(&r);
    }
  }

  bool both_ends_mapped(const Relation& r) const {
    return forward.count(r.source) && forward.count(r.target);
  }

  // Claims capacity for every a-relation completed by mapping `id`; rolls the
  // claims back and reports failure if any key is exhausted.
  bool claim_relations(const std::string& id, std::vector<std::string>& claimed) {
    auto it = touching.find(id);
    if (it == touching.end()) return true;
    for (const Relation* r : it->second) {
      if (!both_ends_mapped(*r)) continue;
      std::string key = relation_prune_key(*r, forward);
      auto budget = rel_budget.find(key);
      if (budget == rel_budget.end() || budget->second == 0) {
        for (auto rit = claimed.rbegin(); rit != claimed.rend(); ++rit) ++rel_budget[*rit];
        claimed.clear();
        return false;
      }
      --budget->second;
      claimed.push_back(std::move(key));
    }
    return true;
  }

  void release_relations(const std::vector<std::string>& claimed) {
    for (const auto& key : claimed) ++rel_budget[key];
  }

  bool assign(std::size_t slot, const std::vector<const Node*>& order,
              const std::vector<std::vector<const Node*>>& candidates) {
    if (slot == order.size()) return assign_variables(0);
    const Node* an = order[slot];
    for (const Node* bn : candidates[slot]) {
      if (used.count(bn->id)) continue;
      forward[an->id] = bn->id;
      used.insert(bn->id);
      std::vector<std::string> claimed;
      if (claim_relations(an->id, claimed) && assign(slot + 1, order, candidates)) return true;
      release_relations(claimed);
      used.erase(bn->id);
      forward.erase(an->id);
    }
    return false;
  }

  bool assign_variables(std::size_t idx) {
    if (idx == a.variables.size()) return verify_mapping(a, b, forward);
    const LabelVariable& av = a.variables[idx];
    for (const auto& bv : b.variables) {
      if (used.count(bv.id) || bv.domain.size() != av.domain.size()) continue;
      bool domains_match = true;
      for (std::size_t i = 0; i < av.domain.size(); ++i)
        if (forward.at(av.domain[i]) != bv.domain[i]) {
          domains_match = false;
          break;
        }
      if (!domains_match) continue;
      forward[av.id] = bv.id;
      used.insert(bv.id);
      std::vector<std::string> claimed;
      if (claim_relations(av.id, claimed) && assign_variables(idx + 1)) return true;
      release_relations(claimed);
      used.erase(bv.id);
      forward.erase(av.id);
    }
    return false;
  }
};

}  // namespace

bool isomorphic(const SemRep& a, const SemRep& b, std::size_t node_cap) {
  if (a.nodes.size() > node_cap || b.nodes.size() > node_cap)
    throw Error(Errc::size_limit,
                "document exceeds the " + std::to_string(node_cap) + "-node comparison cap");
  for (const SemRep* d : {&a, &b}) {
    auto v = check_integrity(*d);
    if (!v.empty())
      throw Error(Errc::integrity_error,
                  "cannot compare a document with integrity violations; first: " +
                      v.front().message);
  }
  if (a.nodes.size() != b.nodes.size() || a.relations.size() != b.relations.size() ||
      a.alt_groups.size() != b.alt_groups.size() || a.variables.size() != b.variables.size())
    return false;

  // Candidate lists by mapping-independent signature; most-constrained first.
  std::unordered_map<std::string, std::vector<const Node*>> b_by_sig;
  for (const auto& bn : b.nodes) b_by_sig[node_signature(b, bn)].push_back(&bn);
  std::vector<const Node*> order;
  std::vector<std::vector<const Node*>> candidates;
  for (const auto& an : a.nodes) {
    auto it = b_by_sig.find(node_signature(a, an));
    if (it == b_by_sig.end()) return false;
    order.push_back(&an);
    candidates.push_back(it->second);
  }
  std::vector<std::size_t> idx(order.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t x, std::size_t y) {
                     return candidates[x].size() < candidates[y].size();
                   });
  std::vector<const Node*> order2;
  std::vector<std::vector<const Node*>> candidates2;
  for (std::size_t i : idx) {
    order2.push_back(order[i]);
    candidates2.push_back(std::move(candidates[i]));
  }

  IsoSearch search(a, b);
  return search.assign(0, order2, candidates2);
}

// --- denotation --------------------------------------------------------------

Assertion Assertion::node_kind(std::string id, NodeKind k) {
  Assertion a;
  a.tag = Tag::kind;
  a.subject = std::move(id);
  a.value = std::string(kind_name(k));
  return a;
}

Assertion Assertion::restr(std::string id, std::string category, std::string value) {
  Assertion a;
  a.tag = Tag::restr;
  a.subject = std::move(id);
  a.category = std::move(category);
  a.value = std::move(value);
  return a;
}

Assertion Assertion::rel(std::string source, std::string target, std::string category,
                         std::string value) {
  Assertion a;
  a.tag = Tag::rel;
  a.subject = std::move(source);
  a.object = std::move(target);
  a.category = std::move(category);
  a.value = std::move(value);
  return a;
}

Assertion Assertion::temporal(std::string id, std::int64_t start, std::int64_t end) {
  Assertion a;
  a.tag = Tag::temporal;
  a.subject = std::move(id);
  a.start = start;
  a.end = end;
  return a;
}

std::string Assertion::str() const {
  switch (tag) {
    case Tag::kind: return "kind(" + subject + ", " + value + ")";
    case Tag::restr: return "restr(" + subject + ", " + category + ", " + value + ")";
    case Tag::rel: return "rel(" + subject + ", " + object + ", " + category + ", " + value + ")";
    case Tag::temporal:
      return "temporal(" + subject + ", " + std::to_string(start) + ", " + std::to_string(end) +
             ")";
  }
  return {};
}

AssertionSet denote(const GroundRep& g) {
  if (!g.rep.alt_groups.empty())
    throw Error(Errc::not_ground, "document still carries alternative groups");
  if (!g.rep.variables.empty())
    throw Error(Errc::not_ground, "document still carries label variables");
  AssertionSet out;
  for (const auto& n : g.rep.nodes) {
    out.insert(Assertion::node_kind(n.id, n.kind));
    for (const auto& r : n.restrictions)
      out.insert(Assertion::restr(n.id, r.category, r.value.lexical));
    if (n.extent && n.kind == NodeKind::event)
      out.insert(Assertion::temporal(n.id, n.extent->start, n.extent->end));
  }
  for (const auto& r : g.rep.relations) {
    if (r.restrictions.empty()) {
      out.insert(Assertion::rel(r.source, r.target, "rel", "unspecified"));
    } else {
      for (const auto& res : r.restrictions)
        out.insert(Assertion::rel(r.source, r.target, res.category, res.value.lexical));
    }
  }
  return out;
}

}  // namespace semrep
