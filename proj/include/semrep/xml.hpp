// The concrete XML instantiation of the representation metamodel: a
// profile-driven element/attribute vocabulary, a reader that accepts the
// interchange format (plus the historical shorthand for alternatives), and a
// canonical serializer with deterministic byte output.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semrep/model.hpp"
#include "semrep/xml_dom.hpp"

namespace semrep {

// Concrete markup names for the structural roles. Category names are never
// profiled — they are data, not structure.
struct FormatProfile {
  std::string namespace_uri = "urn:semrep:1";

  std::string document_element = "semRep";
  std::string event_element = "event";
  std::string participant_element = "participant";
  std::string relation_element = "relation";
  std::string group_element = "alt";
  std::string choice_element = "choice";
  std::string link_element = "link";
  std::string meta_element = "meta";
  std::string variable_element = "var";

  std::string id_attr = "id";
  std::string source_attr = "source";
  std::string target_attr = "target";
  std::string cert_attr = "cert";
  std::string kind_attr = "kind";
  std::string href_attr = "href";
  std::string domain_attr = "domain";
  std::string start_attr = "start";
  std::string end_attr = "end";

  bool is_structural_element(std::string_view local) const;
};

// Throws Errc::invalid_argument when names are not XML names or two structural
// roles share an element name.
void check_profile(const FormatProfile& profile);

// Profile file: root <profile> with optional ns attribute and <element
// role="…" name="…"/> / <attribute role="…" name="…"/> children. Unlisted
// roles keep their defaults. Throws Errc::parse_error.
FormatProfile load_profile(std::string_view text);

struct ParseResult {
  std::optional<SemRep> doc;  // absent when any diagnostic is fatal
  std::vector<xmldom::Diagnostic> diagnostics;
  bool ok() const { return doc.has_value(); }
};

// Reads one document. Fatal diagnostics (malformed markup, duplicate ids,
// dangling references, certs outside [0,1], …) leave `doc` absent; warnings
// (unknown attributes, ignored DOCTYPE) do not. Never yields a document that
// fails check_integrity.
ParseResult parse(std::string_view text, const FormatProfile& profile = {});

// Canonicalizes, then emits deterministic UTF-8: canonical-equal documents
// produce byte-identical output. Throws Errc::integrity_error.
std::string serialize(const SemRep& doc, const FormatProfile& profile = {});

// Splits an href at the first '#'; the fragment is kept opaque. kind must name
// a link kind ("domainModel" or "lowerLevel").
ExternalLink parse_link(std::string_view href, std::string_view kind);

std::string link_kind_name(LinkKind k);
std::string link_href(const ExternalLink& link);  // target["#" fragment]

}  // namespace semrep
