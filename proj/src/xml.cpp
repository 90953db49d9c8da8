#include "semrep/xml.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace semrep {

namespace {

constexpr std::string_view kXmlNs = "http://www.w3.org/XML/1998/namespace";

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (b < e && space(s[b])) ++b;
  while (e > b && space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (i < s.size()) {
    while (i < s.size() && space(s[i])) ++i;
    std::size_t b = i;
    while (i < s.size() && !space(s[i])) ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

bool is_xml_name(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (!alpha(s[0]) && s[0] != '_') return false;
  for (char c : s.substr(1))
    if (!alpha(c) && !(c >= '0' && c <= '9') && c != '_' && c != '-' && c != '.') return false;
  return true;
}

}  // namespace

bool FormatProfile::is_structural_element(std::string_view local) const {
  return local == document_element || local == event_element || local == participant_element ||
         local == relation_element || local == group_element || local == choice_element ||
         local == link_element || local == meta_element || local == variable_element;
}

void check_profile(const FormatProfile& p) {
  const std::pair<const char*, const std::string*> names[] = {
      {"document", &p.document_element}, {"event", &p.event_element},
      {"participant", &p.participant_element}, {"relation", &p.relation_element},
      {"group", &p.group_element}, {"choice", &p.choice_element},
      {"link", &p.link_element}, {"meta", &p.meta_element},
      {"variable", &p.variable_element}};
  for (const auto& [role, name] : names)
    if (!is_xml_name(*name))
      throw Error(Errc::invalid_argument,
                  std::string("profile ") + role + " element name '" + *name +
                      "' is not an XML name");
  for (std::size_t i = 0; i < std::size(names); ++i)
    for (std::size_t j = i + 1; j < std::size(names); ++j)
      if (*names[i].second == *names[j].second)
        throw Error(Errc::invalid_argument,
                    std::string("profile roles ") + names[i].first + " and " + names[j].first +
                        " share the element name '" + *names[i].second + "'");
  const std::pair<const char*, const std::string*> attrs[] = {
      {"id", &p.id_attr},     {"source", &p.source_attr}, {"target", &p.target_attr},
      {"cert", &p.cert_attr}, {"kind", &p.kind_attr},     {"href", &p.href_attr},
      {"domain", &p.domain_attr}, {"start", &p.start_attr}, {"end", &p.end_attr}};
  for (const auto& [role, name] : attrs)
    if (!is_xml_name(*name))
      throw Error(Errc::invalid_argument,
                  std::string("profile ") + role + " attribute name '" + *name +
                      "' is not an XML name");
}

FormatProfile load_profile(std::string_view text) {
  xmldom::Document dom = xmldom::parse(text);
  if (!dom.ok()) {
    std::string msg = "profile does not parse";
    for (const auto& d : dom.diagnostics)
      if (d.fatal) {
        msg = "profile line " + std::to_string(d.line) + ":" + std::to_string(d.col) + ": " +
              d.message;
        break;
      }
    throw Error(Errc::parse_error, msg);
  }
  const xmldom::Element& root = *dom.root;
  if (root.local != "profile")
    throw Error(Errc::parse_error, "expected a <profile> root element, found <" + root.name + ">");
  FormatProfile p;
  if (const std::string* ns = root.attr_value("ns")) p.namespace_uri = *ns;
  std::unordered_map<std::string_view, std::string*> element_roles = {
      {"document", &p.document_element}, {"event", &p.event_element},
      {"participant", &p.participant_element}, {"relation", &p.relation_element},
      {"group", &p.group_element}, {"choice", &p.choice_element},
      {"link", &p.link_element}, {"meta", &p.meta_element},
      {"variable", &p.variable_element}};
  std::unordered_map<std::string_view, std::string*> attr_roles = {
      {"id", &p.id_attr},     {"source", &p.source_attr}, {"target", &p.target_attr},
      {"cert", &p.cert_attr}, {"kind", &p.kind_attr},     {"href", &p.href_attr},
      {"domain", &p.domain_attr}, {"start", &p.start_attr}, {"end", &p.end_attr}};
  for (const auto& child : root.children) {
    auto where = [&]() {
      return " (line " + std::to_string(child.line) + ")";
    };
    const std::string* role = child.attr_value("role");
    const std::string* name = child.attr_value("name");
    if (!role || !name)
      throw Error(Errc::parse_error,
                  "profile entries need role and name attributes" + where());
    auto& table = child.local == "element"    ? element_roles
                  : child.local == "attribute" ? attr_roles
                                               : element_roles;
    if (child.local != "element" && child.local != "attribute")
      throw Error(Errc::parse_error, "unknown profile entry <" + child.name + ">" + where());
    auto it = table.find(*role);
    if (it == table.end())
      throw Error(Errc::parse_error,
                  "unknown profile " + child.local + " role '" + *role + "'" + where());
    *it->second = *name;
  }
  check_profile(p);
  return p;
}

std::string link_kind_name(LinkKind k) {
  return k == LinkKind::domain_model ? "domainModel" : "lowerLevel";
}

ExternalLink parse_link(std::string_view href, std::string_view kind) {
  ExternalLink link;
  if (kind == "domainModel") link.kind = LinkKind::domain_model;
  else if (kind == "lowerLevel") link.kind = LinkKind::lower_level;
  else
    throw Error(Errc::unknown_link_kind,
                "unknown link kind '" + std::string(kind) + "' (domainModel or lowerLevel)");
  std::size_t hash = href.find('#');
  if (hash == std::string_view::npos) {
    link.target = std::string(href);
  } else {
    link.target = std::string(href.substr(0, hash));
    link.fragment = std::string(href.substr(hash + 1));
  }
  if (!has_uri_scheme(link.target) && !link.fragment)
    throw Error(Errc::invalid_uri,
                "link target '" + std::string(href) + "' has neither a scheme nor a fragment");
  return link;
}

std::string link_href(const ExternalLink& link) {
  return link.fragment ? link.target + "#" + *link.fragment : link.target;
}

// --- reading -------------------------------------------------------------------

namespace {

struct StagedGroup {
  AltGroup group;  // owner filled in once the node id is final
  std::size_t line = 0, col = 0;
};

struct StagedNode {
  Node node;
  std::vector<StagedGroup> groups;
  std::size_t line = 0, col = 0;
};

struct StagedRelation {
  Relation rel;
  std::size_t line = 0, col = 0;
};

struct StagedVariable {
  LabelVariable var;
  std::size_t line = 0, col = 0;
};

struct Reader {
  const FormatProfile& p;
  const xmldom::Document& dom;
  std::vector<xmldom::Diagnostic>& diags;

  std::vector<StagedNode> nodes;
  std::vector<StagedRelation> relations;
  std::vector<StagedVariable> variables;
  SemRep doc;  // holds id, document meta, document extensions while staging
  bool doc_meta_seen = false;

  Reader(const FormatProfile& profile, const xmldom::Document& d,
         std::vector<xmldom::Diagnostic>& out)
      : p(profile), dom(d), diags(out) {}

  void fatal(const xmldom::Element& el, std::string msg) {
    diags.push_back({true, el.line, el.col, std::move(msg)});
  }
  void fatal_at(std::size_t line, std::size_t col, std::string msg) {
    diags.push_back({true, line, col, std::move(msg)});
  }
  void warn(const xmldom::Element& el, std::string msg) {
    diags.push_back({false, el.line, el.col, std::move(msg)});
  }

  bool structural_space(const xmldom::Element& el) const {
    return el.ns.empty() || el.ns == p.namespace_uri;
  }

  std::string blob(const xmldom::Element& el) const {
    return dom.source.substr(el.begin, el.end - el.begin);
  }

  bool is_xml_lang(const xmldom::Attribute& a) const {
    return a.local == "lang" && (a.ns == kXmlNs || a.name == "xml:lang");
  }

  // Reports unknown attributes; `known` lists recognized unprefixed names.
  void check_attrs(const xmldom::Element& el, std::initializer_list<std::string_view> known,
                   bool lang_allowed = false) {
    for (const auto& a : el.attributes) {
      if (lang_allowed && is_xml_lang(a)) continue;
      bool ok = a.ns.empty() && std::find(known.begin(), known.end(), a.name) != known.end();
      if (!ok) warn(el, "unknown attribute '" + a.name + "' on <" + el.name + ">");
    }
  }

  void reject_text(const xmldom::Element& el) {
    if (el.has_nonspace_text)
      fatal(el, "unexpected text content inside <" + el.name + ">: '" + trim(el.text) + "'");
  }

  std::optional<std::string> id_of(const xmldom::Element& el) {
    const std::string* v = el.attr_value(p.id_attr);
    return v ? std::optional<std::string>(*v) : std::nullopt;
  }

  // A restriction element: its local name is the category, its value comes
  // from a target attribute (reference) or its character data.
  void read_restriction(const xmldom::Element& el, std::vector<Restriction>& into,
                        bool cert_allowed, double* cert_out) {
    for (const auto& a : el.attributes) {
      if (is_xml_lang(a)) {
        std::string lang = trim(a.value);
        into.push_back({"lang", is_valid_token(lang) ? Value::token(lang) : Value::text(lang)});
        continue;
      }
      if (a.ns.empty() && a.name == p.target_attr) continue;
      if (a.ns.empty() && a.name == p.cert_attr && cert_allowed) continue;
      warn(el, "unknown attribute '" + a.name + "' on <" + el.name + ">");
    }
    if (!el.children.empty()) {
      fatal(el, "restriction <" + el.name + "> must hold a text value, not elements");
      return;
    }
    if (cert_allowed && cert_out) {
      if (const std::string* cert = el.attr_value(p.cert_attr)) {
        std::optional<double> v = parse_number(trim(*cert));
        if (!v) {
          fatal(el, "certainty '" + *cert + "' is not a number");
          return;
        }
        *cert_out = *v;
      }
    }
    Restriction r;
    r.category = el.local;
    if (const std::string* target = el.attr_value(p.target_attr)) {
      if (el.has_nonspace_text) {
        fatal(el, "restriction <" + el.name + "> has both a target attribute and text");
        return;
      }
      if (!is_valid_token(*target)) {
        fatal(el, "target '" + *target + "' is not a valid identifier");
        return;
      }
      r.value = Value::reference(*target);
    } else {
      std::string text = trim(el.text);
      r.value = is_valid_token(text) ? Value::token(std::move(text)) : Value::text(std::move(text));
    }
    into.push_back(std::move(r));
  }

  void read_link(const xmldom::Element& el, Node& node) {
    check_attrs(el, {p.kind_attr, p.href_attr});
    reject_text(el);
    if (!el.children.empty()) {
      fatal(el, "<" + el.name + "> does not take child elements");
      return;
    }
    const std::string* kind = el.attr_value(p.kind_attr);
    const std::string* href = el.attr_value(p.href_attr);
    if (!kind || !href) {
      fatal(el, "<" + el.name + "> needs both " + p.kind_attr + " and " + p.href_attr +
                    " attributes");
      return;
    }
    try {
      node.links.push_back(parse_link(*href, *kind));
    } catch (const Error& e) {
      fatal(el, e.what());
    }
  }

  void read_meta(const xmldom::Element& el, MetaBlock& meta, std::vector<std::string>& blobs) {
    check_attrs(el, {});
    reject_text(el);
    for (const auto& child : el.children) {
      if (!structural_space(child)) {
        blobs.push_back(blob(child));
        continue;
      }
      reject_text(child);
      if (!child.children.empty()) {
        fatal(child, "<" + child.name + "> does not take child elements");
        continue;
      }
      if (child.local == "environment") {
        if (meta.environment) {
          fatal(child, "duplicate <environment> metadata");
          continue;
        }
        check_attrs(child, {"time", "spatial"});
        EnvironmentMeta env;
        if (const std::string* t = child.attr_value("time")) {
          std::optional<std::int64_t> v = parse_integer(trim(*t));
          if (!v) {
            fatal(child, "time '" + *t + "' is not an integer millisecond count");
            continue;
          }
          env.timestamp = *v;
        }
        if (const std::string* sp = child.attr_value("spatial")) env.spatial = *sp;
        meta.environment = std::move(env);
      } else if (child.local == "processing") {
        if (meta.processing) {
          fatal(child, "duplicate <processing> metadata");
          continue;
        }
        check_attrs(child, {"producer", "confidence"});
        ProcessingMeta proc;
        if (const std::string* pr = child.attr_value("producer")) proc.producer = *pr;
        if (const std::string* c = child.attr_value("confidence")) {
          std::optional<double> v = parse_number(trim(*c));
          if (!v) {
            fatal(child, "confidence '" + *c + "' is not a number");
            continue;
          }
          proc.confidence = *v;
        }
        meta.processing = std::move(proc);
      } else if (child.local == "interactional") {
        if (meta.interactional) {
          fatal(child, "duplicate <interactional> metadata");
          continue;
        }
        check_attrs(child, {"speaker", "addressees"});
        InteractionalMeta inter;
        if (const std::string* sp = child.attr_value("speaker")) inter.speaker = *sp;
        if (const std::string* ad = child.attr_value("addressees"))
          inter.addressees = split_tokens(*ad);
        meta.interactional = std::move(inter);
      } else {
        fatal(child, "unknown metadata element <" + child.name + ">");
      }
    }
  }

  void read_choice(const xmldom::Element& el, StagedNode& owner, AltGroup& group) {
    check_attrs(el, {p.cert_attr});
    reject_text(el);
    Alternative alt;
    if (const std::string* cert = el.attr_value(p.cert_attr)) {
      std::optional<double> v = parse_number(trim(*cert));
      if (!v) {
        fatal(el, "certainty '" + *cert + "' is not a number");
        return;
      }
      alt.cert = *v;
    }
    for (const auto& child : el.children) {
      if (!structural_space(child)) {
        owner.node.extensions.push_back(blob(child));
        continue;
      }
      if (p.is_structural_element(child.local)) {
        fatal(child, "<" + child.name + "> is not allowed inside <" + el.name + ">");
        continue;
      }
      read_restriction(child, alt.bundle, false, nullptr);
    }
    group.alternatives.push_back(std::move(alt));
  }

  void read_group(const xmldom::Element& el, StagedNode& owner) {
    check_attrs(el, {p.id_attr});
    reject_text(el);
    StagedGroup staged;
    staged.line = el.line;
    staged.col = el.col;
    if (auto id = id_of(el)) staged.group.id = *id;
    for (const auto& child : el.children) {
      if (!structural_space(child)) {
        owner.node.extensions.push_back(blob(child));
        continue;
      }
      if (child.local == p.choice_element) {
        read_choice(child, owner, staged.group);
        continue;
      }
      if (p.is_structural_element(child.local)) {
        fatal(child, "<" + child.name + "> is not allowed inside <" + el.name + ">");
        continue;
      }
      // Historical shorthand: a bare restriction child with its own cert.
      Alternative alt;
      double cert = 1.0;
      std::size_t before = alt.bundle.size();
      read_restriction(child, alt.bundle, true, &cert);
      if (alt.bundle.size() == before) continue;  // restriction was rejected
      alt.cert = cert;
      staged.group.alternatives.push_back(std::move(alt));
    }
    owner.groups.push_back(std::move(staged));
  }

  void read_node(const xmldom::Element& el, NodeKind kind) {
    StagedNode staged;
    staged.line = el.line;
    staged.col = el.col;
    staged.node.kind = kind;
    check_attrs(el, {p.id_attr, p.start_attr, p.end_attr}, /*lang_allowed=*/true);
    if (auto id = id_of(el)) staged.node.id = *id;
    const std::string* start = el.attr_value(p.start_attr);
    const std::string* end = el.attr_value(p.end_attr);
    if (start || end) {
      if (!start || !end) {
        fatal(el, "<" + el.name + "> carries only one of " + p.start_attr + "/" + p.end_attr);
        return;
      }
      std::optional<std::int64_t> s = parse_integer(trim(*start));
      std::optional<std::int64_t> e = parse_integer(trim(*end));
      if (!s || !e) {
        fatal(el, "temporal extent bounds must be integer milliseconds");
        return;
      }
      staged.node.extent = TemporalExtent{*s, *e};
    }
    for (const auto& a : el.attributes)
      if (is_xml_lang(a)) {
        std::string lang = trim(a.value);
        staged.node.restrictions.push_back(
            {"lang", is_valid_token(lang) ? Value::token(lang) : Value::text(lang)});
      }
    reject_text(el);
    bool meta_seen = false;
    for (const auto& child : el.children) {
      if (!structural_space(child)) {
        staged.node.extensions.push_back(blob(child));
        continue;
      }
      if (child.local == p.group_element) {
        read_group(child, staged);
      } else if (child.local == p.link_element) {
        read_link(child, staged.node);
      } else if (child.local == p.meta_element) {
        if (meta_seen)
          fatal(child, "duplicate <" + child.name + "> on <" + el.name + ">");
        else
          read_meta(child, staged.node.meta, staged.node.extensions);
        meta_seen = true;
      } else if (p.is_structural_element(child.local)) {
        fatal(child, "<" + child.name + "> is not allowed inside <" + el.name + ">");
      } else {
        read_restriction(child, staged.node.restrictions, false, nullptr);
      }
    }
    nodes.push_back(std::move(staged));
  }

  void read_relation(const xmldom::Element& el) {
    StagedRelation staged;
    staged.line = el.line;
    staged.col = el.col;
    check_attrs(el, {p.id_attr, p.source_attr, p.target_attr}, /*lang_allowed=*/true);
    if (auto id = id_of(el)) staged.rel.id = *id;
    const std::string* source = el.attr_value(p.source_attr);
    const std::string* target = el.attr_value(p.target_attr);
    if (!source || !target) {
      fatal(el, "<" + el.name + "> needs both " + p.source_attr + " and " + p.target_attr +
                    " attributes");
      return;
    }
    staged.rel.source = *source;
    staged.rel.target = *target;
    for (const auto& a : el.attributes)
      if (is_xml_lang(a)) {
        std::string lang = trim(a.value);
        staged.rel.restrictions.push_back(
            {"lang", is_valid_token(lang) ? Value::token(lang) : Value::text(lang)});
      }
    reject_text(el);
    for (const auto& child : el.children) {
      if (!structural_space(child)) {
        staged.rel.extensions.push_back(blob(child));
        continue;
      }
      if (p.is_structural_element(child.local)) {
        fatal(child, "<" + child.name + "> is not allowed inside <" + el.name + ">");
        continue;
      }
      read_restriction(child, staged.rel.restrictions, false, nullptr);
    }
    relations.push_back(std::move(staged));
  }

  void read_variable(const xmldom::Element& el) {
    StagedVariable staged;
    staged.line = el.line;
    staged.col = el.col;
    check_attrs(el, {p.id_attr, p.domain_attr});
    reject_text(el);
    if (!el.children.empty()) {
      fatal(el, "<" + el.name + "> does not take child elements");
      return;
    }
    if (auto id = id_of(el)) staged.var.id = *id;
    const std::string* domain = el.attr_value(p.domain_attr);
    if (!domain) {
      fatal(el, "<" + el.name + "> is missing its " + p.domain_attr + " attribute");
      return;
    }
    staged.var.domain = split_tokens(*domain);
    variables.push_back(std::move(staged));
  }

  void read_document(const xmldom::Element& root) {
    if (root.local != p.document_element || !structural_space(root)) {
      fatal(root, "expected a <" + p.document_element + "> document element, found <" +
                      root.name + ">");
      return;
    }
    check_attrs(root, {p.id_attr});
    if (auto id = id_of(root)) {
      if (!is_valid_token(*id)) {
        fatal(root, "document identifier '" + *id + "' is not a token");
        return;
      }
      doc.id = *id;
    }
    reject_text(root);
    for (const auto& child : root.children) {
      if (!structural_space(child)) {
        doc.extensions.push_back(blob(child));
        continue;
      }
      if (child.local == p.event_element) read_node(child, NodeKind::event);
      else if (child.local == p.participant_element) read_node(child, NodeKind::participant);
      else if (child.local == p.relation_element) read_relation(child);
      else if (child.local == p.variable_element) read_variable(child);
      else if (child.local == p.meta_element) {
        if (doc_meta_seen) {
          fatal(child, "duplicate document-level <" + child.name + ">");
        } else {
          doc_meta_seen = true;
          read_meta(child, doc.meta, doc.extensions);
        }
      } else if (child.local == p.group_element) {
        fatal(child, "<" + child.name + "> needs an owning node; it cannot sit at document level");
      } else {
        fatal(child, "unexpected element <" + child.name + "> at document level");
      }
    }
  }

  // Assigns generated identifiers to unnamed elements, then materializes the
  // document in staging order.
  SemRep assemble(std::unordered_map<std::string, std::pair<std::size_t, std::size_t>>& where) {
    std::unordered_set<std::string> used;
    auto note = [&](const std::string& id, std::size_t line, std::size_t col) {
      if (!id.empty()) {
        used.insert(id);
        where.emplace(id, std::make_pair(line, col));
      }
    };
    for (const auto& s : nodes) {
      note(s.node.id, s.line, s.col);
      for (const auto& g : s.groups) note(g.group.id, g.line, g.col);
    }
    for (const auto& s : relations) note(s.rel.id, s.line, s.col);
    for (const auto& s : variables) note(s.var.id, s.line, s.col);

    auto generate = [&](char prefix, std::size_t line, std::size_t col) {
      for (std::size_t k = 1;; ++k) {
        std::string candidate = prefix + std::to_string(k);
        if (used.insert(candidate).second) {
          where.emplace(candidate, std::make_pair(line, col));
          return candidate;
        }
      }
    };

    SemRep out = std::move(doc);
    for (auto& s : nodes) {
      if (s.node.id.empty()) s.node.id = generate('n', s.line, s.col);
      std::string owner = s.node.id;
      out.nodes.push_back(std::move(s.node));
      for (auto& g : s.groups) {
        if (g.group.id.empty()) g.group.id = generate('a', g.line, g.col);
        g.group.owner = owner;
        out.alt_groups.push_back(std::move(g.group));
      }
    }
    for (auto& s : variables) {
      if (s.var.id.empty()) s.var.id = generate('v', s.line, s.col);
      out.variables.push_back(std::move(s.var));
    }
    for (auto& s : relations) {
      if (s.rel.id.empty()) s.rel.id = generate('r', s.line, s.col);
      out.relations.push_back(std::move(s.rel));
    }
    return out;
  }
};

}  // namespace

ParseResult parse(std::string_view text, const FormatProfile& profile) {
  check_profile(profile);
  ParseResult result;
  xmldom::Document dom = xmldom::parse(text);
  result.diagnostics = dom.diagnostics;
  if (!dom.ok()) {
    if (!dom.any_fatal())
      result.diagnostics.push_back({true, 1, 1, "no document element found"});
    return result;
  }

  Reader reader(profile, dom, result.diagnostics);
  reader.read_document(*dom.root);
  bool fatal_seen = std::any_of(result.diagnostics.begin(), result.diagnostics.end(),
                                [](const xmldom::Diagnostic& d) { return d.fatal; });
  if (fatal_seen) return result;

  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> where;
  SemRep doc = reader.assemble(where);

  // Integrity backstop: a parse either fails or yields a sound document.
  for (const auto& v : check_integrity(doc)) {
    auto at = where.find(v.id);
    std::size_t line = at == where.end() ? dom.root->line : at->second.first;
    std::size_t col = at == where.end() ? dom.root->col : at->second.second;
    result.diagnostics.push_back({true, line, col, v.message + " [" + v.rule + "]"});
  }
  if (std::any_of(result.diagnostics.begin(), result.diagnostics.end(),
                  [](const xmldom::Diagnostic& d) { return d.fatal; }))
    return result;
  result.doc = std::move(doc);
  return result;
}

// --- writing -------------------------------------------------------------------

namespace {

struct Writer {
  const FormatProfile& p;
  std::string out;

  void open_line(int depth) { out.append(std::size_t(depth) * 2, ' '); }

  void attr(std::string_view name, std::string_view value) {
    out += ' ';
    out += name;
    out += "=\"";
    out += xmldom::escape_attr(value);
    out += '"';
  }

  void restriction(int depth, const Restriction& r) {
    open_line(depth);
    out += '<';
    out += r.category;
    if (r.value.type == ValueType::reference) {
      attr(p.target_attr, r.value.lexical);
      out += "/>\n";
    } else if (r.value.lexical.empty()) {
      out += "/>\n";
    } else {
      out += '>';
      out += xmldom::escape_text(r.value.lexical);
      out += "</";
      out += r.category;
      out += ">\n";
    }
  }

  void meta(int depth, const MetaBlock& m) {
    if (m.empty()) return;
    open_line(depth);
    out += '<';
    out += p.meta_element;
    out += ">\n";
    if (m.environment) {
      open_line(depth + 1);
      out += "<environment";
      if (m.environment->timestamp) attr("time", std::to_string(*m.environment->timestamp));
      if (m.environment->spatial) attr("spatial", *m.environment->spatial);
      out += "/>\n";
    }
    if (m.processing) {
      open_line(depth + 1);
      out += "<processing";
      if (m.processing->producer) attr("producer", *m.processing->producer);
      if (m.processing->confidence) attr("confidence", format_number(*m.processing->confidence));
      out += "/>\n";
    }
    if (m.interactional) {
      open_line(depth + 1);
      out += "<interactional";
      if (m.interactional->speaker) attr("speaker", *m.interactional->speaker);
      if (!m.interactional->addressees.empty()) {
        std::string joined;
        for (const auto& a : m.interactional->addressees) {
          if (!joined.empty()) joined += ' ';
          joined += a;
        }
        attr("addressees", joined);
      }
      out += "/>\n";
    }
    open_line(depth);
    out += "</";
    out += p.meta_element;
    out += ">\n";
  }

  void extensions(int depth, const std::vector<std::string>& blobs) {
    for (const auto& b : blobs) {
      open_line(depth);
      out += b;  // byte-preserved foreign content
      out += '\n';
    }
  }

  void group(int depth, const AltGroup& g) {
    open_line(depth);
    out += '<';
    out += p.group_element;
    attr(p.id_attr, g.id);
    out += ">\n";
    for (const auto& alt : g.alternatives) {
      open_line(depth + 1);
      out += '<';
      out += p.choice_element;
      attr(p.cert_attr, format_number(alt.cert));
      if (alt.bundle.empty()) {
        out += "/>\n";
        continue;
      }
      out += ">\n";
      for (const auto& r : alt.bundle) restriction(depth + 2, r);
      open_line(depth + 1);
      out += "</";
      out += p.choice_element;
      out += ">\n";
    }
    open_line(depth);
    out += "</";
    out += p.group_element;
    out += ">\n";
  }

  void node(int depth, const Node& n, const std::vector<const AltGroup*>& groups) {
    const std::string& element =
        n.kind == NodeKind::event ? p.event_element : p.participant_element;
    open_line(depth);
    out += '<';
    out += element;
    attr(p.id_attr, n.id);
    if (n.extent) {
      attr(p.start_attr, std::to_string(n.extent->start));
      attr(p.end_attr, std::to_string(n.extent->end));
    }
    bool empty = n.restrictions.empty() && groups.empty() && n.links.empty() && n.meta.empty() &&
                 n.extensions.empty();
    if (empty) {
      out += "/>\n";
      return;
    }
    out += ">\n";
    for (const auto& r : n.restrictions) restriction(depth + 1, r);
    for (const AltGroup* g : groups) group(depth + 1, *g);
    for (const auto& l : n.links) {
      open_line(depth + 1);
      out += '<';
      out += p.link_element;
      attr(p.kind_attr, link_kind_name(l.kind));
      attr(p.href_attr, link_href(l));
      out += "/>\n";
    }
    meta(depth + 1, n.meta);
    extensions(depth + 1, n.extensions);
    open_line(depth);
    out += "</";
    out += element;
    out += ">\n";
  }

  void relation(int depth, const Relation& r) {
    open_line(depth);
    out += '<';
    out += p.relation_element;
    attr(p.id_attr, r.id);
    attr(p.source_attr, r.source);
    attr(p.target_attr, r.target);
    if (r.restrictions.empty() && r.extensions.empty()) {
      out += "/>\n";
      return;
    }
    out += ">\n";
    for (const auto& res : r.restrictions) restriction(depth + 1, res);
    extensions(depth + 1, r.extensions);
    open_line(depth);
    out += "</";
    out += p.relation_element;
    out += ">\n";
  }

  void variable(int depth, const LabelVariable& v) {
    open_line(depth);
    out += '<';
    out += p.variable_element;
    attr(p.id_attr, v.id);
    std::string joined;
    for (const auto& m : v.domain) {
      if (!joined.empty()) joined += ' ';
      joined += m;
    }
    attr(p.domain_attr, joined);
    out += "/>\n";
  }
};

void check_serializable_categories(const SemRep& doc, const FormatProfile& p) {
  auto check = [&](const std::vector<Restriction>& rs) {
    for (const auto& r : rs)
      if (p.is_structural_element(r.category))
        throw Error(Errc::invalid_argument,
                    "restriction category '" + r.category +
                        "' collides with a structural element name under this profile");
  };
  for (const auto& n : doc.nodes) check(n.restrictions);
  for (const auto& r : doc.relations) check(r.restrictions);
  for (const auto& g : doc.alt_groups)
    for (const auto& alt : g.alternatives) check(alt.bundle);
}

}  // namespace

std::string serialize(const SemRep& input, const FormatProfile& profile) {
  check_profile(profile);
  SemRep doc = canonicalize(input);
  check_serializable_categories(doc, profile);

  std::unordered_map<std::string_view, std::vector<const AltGroup*>> groups_of;
  for (const auto& g : doc.alt_groups) groups_of[g.owner].push_back(&g);

  Writer w{profile, {}};
  w.out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  w.out += '<';
  w.out += profile.document_element;
  if (!profile.namespace_uri.empty()) w.attr("xmlns", profile.namespace_uri);
  if (!doc.id.empty()) w.attr(profile.id_attr, doc.id);
  bool empty = doc.nodes.empty() && doc.relations.empty() && doc.variables.empty() &&
               doc.meta.empty() && doc.extensions.empty();
  if (empty) {
    w.out += "/>\n";
    return std::move(w.out);
  }
  w.out += ">\n";
  for (const auto& n : doc.nodes) {
    auto it = groups_of.find(n.id);
    static const std::vector<const AltGroup*> none;
    w.node(1, n, it == groups_of.end() ? none : it->second);
  }
  for (const auto& r : doc.relations) w.relation(1, r);
  for (const auto& v : doc.variables) w.variable(1, v);
  w.meta(1, doc.meta);
  w.extensions(1, doc.extensions);
  w.out += "</";
  w.out += profile.document_element;
  w.out += ">\n";
  return std::move(w.out);
}

}  // namespace semrep
