#include "semrep/registry.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "semrep/xml_dom.hpp"

namespace semrep {

bool CategorySpec::applies(Applicability a) const {
  return std::find(applies_to.begin(), applies_to.end(), a) != applies_to.end();
}

const CategorySpec* Registry::find(std::string_view name) const {
  for (const auto& c : categories)
    if (c.name == name) return &c;
  return nullptr;
}

std::string applicability_name(Applicability a) {
  switch (a) {
    case Applicability::event: return "event";
    case Applicability::participant: return "participant";
    case Applicability::relation: return "relation";
    case Applicability::alternative: return "alternative";
  }
  return {};
}

std::string arity_name(Arity a) { return a == Arity::single ? "single" : "multiple"; }

std::string value_space_name(ValueSpace s) {
  switch (s) {
    case ValueSpace::closed: return "closed";
    case ValueSpace::open_text: return "text";
    case ValueSpace::number: return "number";
    case ValueSpace::reference: return "reference";
  }
  return {};
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (b < e && space(s[b])) ++b;
  while (e > b && space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(const xmldom::Element& el, const std::string& msg) {
  throw Error(Errc::parse_error,
              "registry line " + std::to_string(el.line) + ":" + std::to_string(el.col) + ": " +
                  msg);
}

std::optional<Applicability> applicability_from(std::string_view name) {
  if (name == "event") return Applicability::event;
  if (name == "participant") return Applicability::participant;
  if (name == "relation") return Applicability::relation;
  if (name == "alternative") return Applicability::alternative;
  return std::nullopt;
}

CategorySpec read_category(const xmldom::Element& el) {
  CategorySpec spec;
  const std::string* name = el.attr_value("name");
  if (!name) fail(el, "category is missing its name attribute");
  spec.name = *name;
  if (!is_valid_token(spec.name)) fail(el, "category name '" + spec.name + "' is not a token");

  if (const std::string* applies = el.attr_value("appliesTo")) {
    std::string_view rest = *applies;
    while (!rest.empty()) {
      std::size_t comma = rest.find(',');
      std::string part = trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      if (part.empty()) continue;
      std::optional<Applicability> a = applicability_from(part);
      if (!a) fail(el, "category '" + spec.name + "': unknown appliesTo kind '" + part + "'");
      if (std::find(spec.applies_to.begin(), spec.applies_to.end(), *a) == spec.applies_to.end())
        spec.applies_to.push_back(*a);
    }
  } else {
    spec.applies_to = {Applicability::event, Applicability::participant, Applicability::relation,
                       Applicability::alternative};
  }
  std::sort(spec.applies_to.begin(), spec.applies_to.end());

  if (const std::string* arity = el.attr_value("arity")) {
    std::string a = trim(*arity);
    if (a == "single") spec.arity = Arity::single;
    else if (a == "multiple") spec.arity = Arity::multiple;
    else fail(el, "category '" + spec.name + "': unknown arity '" + a + "'");
  }

  if (const std::string* type = el.attr_value("type")) {
    std::string t = trim(*type);
    if (t == "closed") spec.space = ValueSpace::closed;
    else if (t == "text") spec.space = ValueSpace::open_text;
    else if (t == "number") spec.space = ValueSpace::number;
    else if (t == "reference") spec.space = ValueSpace::reference;
    else fail(el, "category '" + spec.name + "': unknown type '" + t + "'");
  }

  if (const std::string* ctx = el.attr_value("contextual")) {
    std::string c = trim(*ctx);
    if (c == "true") spec.contextual = true;
    else if (c == "false") spec.contextual = false;
    else fail(el, "category '" + spec.name + "': contextual must be true or false");
  }

  for (const auto& child : el.children) {
    if (child.local == "value") {
      if (spec.space != ValueSpace::closed)
        fail(child, "category '" + spec.name + "' lists values but is not closed");
      std::string v = trim(child.text);
      if (v.empty()) fail(child, "category '" + spec.name + "' has an empty value");
      if (std::find(spec.closed_values.begin(), spec.closed_values.end(), v) !=
          spec.closed_values.end())
        fail(child, "category '" + spec.name + "' lists value '" + v + "' twice");
      spec.closed_values.push_back(std::move(v));
    } else if (child.local == "definition") {
      spec.definition = trim(child.text);
    } else {
      fail(child, "unknown element <" + child.name + "> inside category '" + spec.name + "'");
    }
  }
  if (spec.space == ValueSpace::closed && spec.closed_values.empty())
    fail(el, "closed category '" + spec.name + "' lists no values");
  return spec;
}

}  // namespace

Registry load_registry(std::string_view text) {
  xmldom::Document dom = xmldom::parse(text);
  if (!dom.ok()) {
    for (const auto& d : dom.diagnostics)
      if (d.fatal)
        throw Error(Errc::parse_error, "registry line " + std::to_string(d.line) + ":" +
                                           std::to_string(d.col) + ": " + d.message);
    throw Error(Errc::parse_error, "registry file has no root element");
  }
  const xmldom::Element& root = *dom.root;
  if (root.local != "registry") fail(root, "expected a <registry> root, found <" + root.name + ">");
  Registry reg;
  const std::string* id = root.attr_value("id");
  reg.id = id ? trim(*id) : "registry";
  for (const auto& child : root.children) {
    if (child.local != "category")
      fail(child, "unexpected element <" + child.name + "> in registry");
    CategorySpec spec = read_category(child);
    if (reg.find(spec.name))
      throw Error(Errc::duplicate_category,
                  "registry declares category '" + spec.name + "' twice");
    reg.categories.push_back(std::move(spec));
  }
  return reg;
}

// --- validation ------------------------------------------------------------------

std::size_t ValidationReport::error_count() const {
  return std::size_t(std::count_if(findings.begin(), findings.end(), [](const Finding& f) {
    return f.severity == Severity::error;
  }));
}

std::size_t ValidationReport::warning_count() const {
  return findings.size() - error_count();
}

namespace {

struct Validator {
  const SemRep& doc;
  const Registry& reg;
  bool strict;
  std::vector<Finding>& findings;

  void finding(Severity sev, const std::string& location, const char* rule, std::string msg) {
    findings.push_back({sev, location, rule, std::move(msg)});
  }

  // Checks one restriction in context; returns the spec when known.
  const CategorySpec* check_restriction(const std::string& location, Applicability where,
                                        const Restriction& r) {
    const CategorySpec* spec = reg.find(r.category);
    if (!spec) {
      finding(strict ? Severity::error : Severity::warning, location, "unknown-category",
              "category '" + r.category + "' is not in registry '" + reg.id + "'");
      return nullptr;
    }
    if (!spec->applies(where))
      finding(Severity::error, location, "applies-to",
              "category '" + r.category + "' does not apply to " + applicability_name(where) +
                  "s");
    switch (spec->space) {
      case ValueSpace::closed:
        if (std::find(spec->closed_values.begin(), spec->closed_values.end(),
                      r.value.lexical) == spec->closed_values.end())
          finding(Severity::error, location, "value-space",
                  "value '" + r.value.lexical + "' is outside the closed space of '" +
                      r.category + "'");
        break;
      case ValueSpace::number:
        if (!parse_number(r.value.lexical))
          finding(Severity::error, location, "value-space",
                  "value '" + r.value.lexical + "' of '" + r.category + "' is not a number");
        break;
      case ValueSpace::reference:
        if (!doc.has_id(r.value.lexical))
          finding(Severity::error, location, "value-space",
                  "value '" + r.value.lexical + "' of '" + r.category +
                      "' does not reference anything in the document");
        break;
      case ValueSpace::open_text: break;
    }
    return spec;
  }

  // Arity over one restriction list: a single-valued category at most once.
  // `ground` carries the owner's ground counts when checking an alternative
  // bundle on top of them.
  void check_arity(const std::string& location, const std::vector<Restriction>& rs,
                   const std::map<std::string, int>* ground) {
    std::map<std::string, int> counts;
    for (const auto& r : rs) ++counts[r.category];
    for (const auto& [category, count] : counts) {
      const CategorySpec* spec = reg.find(category);
      if (!spec || spec->arity != Arity::single) continue;
      int total = count + (ground ? (ground->count(category) ? ground->at(category) : 0) : 0);
      if (total > 1)
        finding(Severity::error, location, "arity",
                "single-valued category '" + category + "' appears " + std::to_string(total) +
                    " times on one owner");
    }
  }

  void run() {
    std::unordered_map<std::string_view, std::map<std::string, int>> ground_counts;
    for (const auto& n : doc.nodes) {
      Applicability where =
          n.kind == NodeKind::event ? Applicability::event : Applicability::participant;
      for (const auto& r : n.restrictions) check_restriction(n.id, where, r);
      check_arity(n.id, n.restrictions, nullptr);
      auto& counts = ground_counts[n.id];
      for (const auto& r : n.restrictions) ++counts[r.category];
    }
    for (const auto& rel : doc.relations) {
      for (const auto& r : rel.restrictions)
        check_restriction(rel.id, Applicability::relation, r);
      check_arity(rel.id, rel.restrictions, nullptr);
    }
    for (const auto& g : doc.alt_groups) {
      const std::map<std::string, int>* ground = nullptr;
      if (auto it = ground_counts.find(g.owner); it != ground_counts.end()) ground = &it->second;
      for (const auto& alt : g.alternatives) {
        for (const auto& r : alt.bundle)
          check_restriction(g.id, Applicability::alternative, r);
        check_arity(g.id, alt.bundle, ground);
      }
    }
  }
};

}  // namespace

ValidationReport validate(const SemRep& doc, const Registry& reg, bool strict) {
  ValidationReport report;
  std::vector<Violation> violations = check_integrity(doc);
  if (!violations.empty()) {
    for (const auto& v : violations)
      report.findings.push_back({Severity::error, v.id, v.rule, v.message});
    report.level = ValidationLevel::well_formed_only;
    return report;
  }
  Validator{doc, reg, strict, report.findings}.run();
  report.level = report.error_count() == 0 ? ValidationLevel::valid
                                           : ValidationLevel::well_formed_only;
  return report;
}

// --- category mapping --------------------------------------------------------------

CategoryMapping load_mapping(std::string_view text) {
  xmldom::Document dom = xmldom::parse(text);
  if (!dom.ok()) {
    for (const auto& d : dom.diagnostics)
      if (d.fatal)
        throw Error(Errc::parse_error, "mapping line " + std::to_string(d.line) + ":" +
                                           std::to_string(d.col) + ": " + d.message);
    throw Error(Errc::parse_error, "mapping file has no root element");
  }
  const xmldom::Element& root = *dom.root;
  if (root.local != "mapping")
    throw Error(Errc::parse_error, "expected a <mapping> root, found <" + root.name + ">");
  CategoryMapping m;
  for (const auto& child : root.children) {
    if (child.local != "map")
      throw Error(Errc::parse_error, "unexpected element <" + child.name + "> in mapping");
    const std::string* from = child.attr_value("from");
    const std::string* to = child.attr_value("to");
    if (!from || !to)
      throw Error(Errc::parse_error, "map entries need from and to attributes");
    MappingPair pair;
    pair.from_name = trim(*from);
    pair.to_name = trim(*to);
    if (!is_valid_token(pair.from_name) || !is_valid_token(pair.to_name))
      throw Error(Errc::parse_error,
                  "map entry '" + pair.from_name + "' -> '" + pair.to_name +
                      "' names must be tokens");
    for (const auto& v : child.children) {
      if (v.local != "value")
        throw Error(Errc::parse_error, "unexpected element <" + v.name + "> in map entry");
      const std::string* vf = v.attr_value("from");
      const std::string* vt = v.attr_value("to");
      if (!vf || !vt)
        throw Error(Errc::parse_error, "value entries need from and to attributes");
      pair.value_map.emplace_back(*vf, *vt);
    }
    m.pairs.push_back(std::move(pair));
  }
  return m;
}

namespace {

void apply_mapping(std::vector<Restriction>& rs,
                   const std::unordered_map<std::string_view, const MappingPair*>& table) {
  for (auto& r : rs) {
    auto it = table.find(r.category);
    if (it == table.end()) continue;
    const MappingPair& pair = *it->second;
    r.category = pair.to_name;
    for (const auto& [from_value, to_value] : pair.value_map) {
      if (r.value.lexical == from_value) {
        r.value.lexical = to_value;
        if (r.value.type == ValueType::token && !is_valid_token(to_value))
          r.value.type = ValueType::text;
        break;
      }
    }
  }
}

}  // namespace

SemRep map_categories(SemRep doc, const CategoryMapping& m) {
  std::unordered_map<std::string_view, const MappingPair*> table;
  for (const auto& pair : m.pairs)
    if (!table.emplace(pair.from_name, &pair).second)
      throw Error(Errc::ambiguous_mapping,
                  "mapping lists from-category '" + pair.from_name + "' twice");
  for (auto& n : doc.nodes) apply_mapping(n.restrictions, table);
  for (auto& r : doc.relations) apply_mapping(r.restrictions, table);
  for (auto& g : doc.alt_groups)
    for (auto& alt : g.alternatives) apply_mapping(alt.bundle, table);
  return doc;
}

// --- registry diff ------------------------------------------------------------------

RegistryDiff registry_diff(const Registry& a, const Registry& b) {
  RegistryDiff diff;
  for (const auto& ca : a.categories) {
    const CategorySpec* cb = b.find(ca.name);
    if (!cb) {
      diff.only_in_a.push_back(ca.name);
      continue;
    }
    std::vector<std::string> fields;
    if (ca.applies_to != cb->applies_to) fields.push_back("applies_to");
    if (ca.arity != cb->arity) fields.push_back("arity");
    if (ca.space != cb->space) fields.push_back("value_space");
    if (ca.closed_values != cb->closed_values) fields.push_back("values");
    if (ca.contextual != cb->contextual) fields.push_back("contextual");
    if (ca.definition != cb->definition) fields.push_back("definition");
    if (!fields.empty()) diff.changed.emplace_back(ca.name, std::move(fields));
  }
  for (const auto& cb : b.categories)
    if (!a.find(cb.name)) diff.only_in_b.push_back(cb.name);
  return diff;
}

}  // namespace semrep
