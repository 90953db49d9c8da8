// Small namespace-aware XML reader used by the interchange and registry
// formats. Covers the subset those formats need — elements, attributes,
// character data, CDATA, comments, processing instructions, DOCTYPE skipping,
// numeric and predefined entities — with line/column diagnostics and
// close-and-continue recovery so one bad end tag does not hide the next.
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace semrep::xmldom {

struct Diagnostic {
  bool fatal = false;  // fatal: no usable document may be built from the parse
  std::size_t line = 0, col = 0;
  std::string message;
};

struct Attribute {
  std::string name;   // as written, prefix included
  std::string local;  // name with any prefix stripped
  std::string ns;     // resolved namespace URI; empty when unprefixed
  std::string value;  // entity-decoded
  std::size_t line = 0, col = 0;
};

struct Element {
  std::string name;   // as written
  std::string local;  // name with any prefix stripped
  std::string ns;     // resolved namespace URI; empty when none applies
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  std::string text;   // direct character data, entity-decoded, concatenated
  bool has_nonspace_text = false;
  std::size_t line = 0, col = 0;
  std::size_t begin = 0, end = 0;  // byte span within Document::source

  const Attribute* attr(std::string_view name_as_written) const;
  const std::string* attr_value(std::string_view name_as_written) const;
};

struct Document {
  std::string source;  // UTF-8 text the element spans index into
  std::optional<Element> root;
  std::vector<Diagnostic> diagnostics;

  bool any_fatal() const;
  bool ok() const { return root.has_value() && !any_fatal(); }
};

// Accepts UTF-8 (with or without BOM), US-ASCII, and ISO-8859-1 input; the
// latter is transcoded, so spans always index UTF-8 text. UTF-16 is refused.
Document parse(std::string_view bytes);

std::string escape_text(std::string_view s);
std::string escape_attr(std::string_view s);

}  // namespace semrep::xmldom
