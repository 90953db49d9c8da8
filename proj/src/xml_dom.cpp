#include "semrep/xml_dom.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace semrep::xmldom {

const Attribute* Element::attr(std::string_view name_as_written) const {
  for (const auto& a : attributes)
    if (a.name == name_as_written) return &a;
  return nullptr;
}

const std::string* Element::attr_value(std::string_view name_as_written) const {
  const Attribute* a = attr(name_as_written);
  return a ? &a->value : nullptr;
}

bool Document::any_fatal() const {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.fatal; });
}

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string escape_attr(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\t': out += "&#9;"; break;
      default: out += c;
    }
  }
  return out;
}

namespace {

constexpr std::string_view kXmlNs = "http://www.w3.org/XML/1998/namespace";

bool name_start_char(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool name_char(char c) {
  return name_start_char(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' ||
         c == '.';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = char(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct NsScope {
  // Innermost binding wins; searched back to front.
  std::vector<std::pair<std::string, std::string>> bindings;  // prefix -> uri
  std::vector<std::size_t> marks;

  void push() { marks.push_back(bindings.size()); }
  void pop() {
    bindings.resize(marks.back());
    marks.pop_back();
  }
  const std::string* lookup(std::string_view prefix) const {
    for (auto it = bindings.rbegin(); it != bindings.rend(); ++it)
      if (it->first == prefix) return &it->second;
    return nullptr;
  }
};

struct Parser {
  const std::string& s;
  Document& doc;
  std::size_t pos = 0;
  std::size_t line = 1, col = 1;
  NsScope ns;

  explicit Parser(const std::string& text, Document& d) : s(text), doc(d) {}

  bool eof() const { return pos >= s.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos + ahead < s.size() ? s[pos + ahead] : '\0';
  }
  bool starts_with(std::string_view prefix) const {
    return s.compare(pos, prefix.size(), prefix) == 0;
  }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos < s.size(); ++i, ++pos) {
      if (s[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  }

  void report(bool fatal, std::size_t at_line, std::size_t at_col, std::string msg) {
    doc.diagnostics.push_back({fatal, at_line, at_col, std::move(msg)});
  }
  void error_here(std::string msg) { report(true, line, col, std::move(msg)); }

  void skip_space() {
    while (!eof() && is_space(peek())) advance();
  }

  std::string read_name() {
    std::string out;
    if (eof() || !name_start_char(peek())) return out;
    while (!eof() && name_char(peek())) {
      out += peek();
      advance();
    }
    return out;
  }

  // Appends the decoded form of an entity reference starting at '&'.
  void decode_entity(std::string& out) {
    std::size_t at_line = line, at_col = col;
    advance();  // '&'
    std::string body;
    while (!eof() && peek() != ';' && peek() != '<' && !is_space(peek()) && body.size() < 32) {
      body += peek();
      advance();
    }
    if (eof() || peek() != ';') {
      report(true, at_line, at_col, "unterminated entity reference '&" + body + "'");
      out += '&';
      out += body;
      return;
    }
    advance();  // ';'
    if (body == "amp") out += '&';
    else if (body == "lt") out += '<';
    else if (body == "gt") out += '>';
    else if (body == "quot") out += '"';
    else if (body == "apos") out += '\'';
    else if (body.size() > 1 && body[0] == '#') {
      long code = -1;
      try {
        code = body[1] == 'x' || body[1] == 'X' ? std::stol(body.substr(2), nullptr, 16)
                                                : std::stol(body.substr(1), nullptr, 10);
      } catch (...) {
      }
      if (code < 0 || code > 0x10FFFF) {
        report(true, at_line, at_col, "bad character reference '&" + body + ";'");
        return;
      }
      // Encode the code point as UTF-8.
      unsigned cp = unsigned(code);
      if (cp < 0x80) {
        out += char(cp);
      } else if (cp < 0x800) {
        out += char(0xC0 | (cp >> 6));
        out += char(0x80 | (cp & 0x3F));
      } else if (cp < 0x10000) {
        out += char(0xE0 | (cp >> 12));
        out += char(0x80 | ((cp >> 6) & 0x3F));
        out += char(0x80 | (cp & 0x3F));
      } else {
        out += char(0xF0 | (cp >> 18));
        out += char(0x80 | ((cp >> 12) & 0x3F));
        out += char(0x80 | ((cp >> 6) & 0x3F));
        out += char(0x80 | (cp & 0x3F));
      }
    } else {
      report(true, at_line, at_col, "unknown entity '&" + body + ";'");
      out += '&';
      out += body;
      out += ';';
    }
  }

  // --- misc constructs --------------------------------------------------------

  bool skip_comment() {
    std::size_t at_line = line, at_col = col;
    advance(4);  // "<!--"
    while (!eof() && !starts_with("-->")) advance();
    if (eof()) {
      report(true, at_line, at_col, "unterminated comment");
      return false;
    }
    advance(3);
    return true;
  }

  bool skip_pi() {
    std::size_t at_line = line, at_col = col;
    advance(2);  // "<?"
    while (!eof() && !starts_with("?>")) advance();
    if (eof()) {
      report(true, at_line, at_col, "unterminated processing instruction");
      return false;
    }
    advance(2);
    return true;
  }

  bool skip_doctype() {
    std::size_t at_line = line, at_col = col;
    report(false, at_line, at_col, "document type declaration ignored");
    advance(9);  // "<!DOCTYPE"
    int depth = 0;
    while (!eof()) {
      char c = peek();
      if (c == '[') ++depth;
      else if (c == ']') --depth;
      else if (c == '>' && depth <= 0) {
        advance();
        return true;
      }
      advance();
    }
    report(true, at_line, at_col, "unterminated document type declaration");
    return false;
  }

  // --- attributes and namespaces ----------------------------------------------

  struct RawAttr {
    std::string name, value;
    std::size_t line, col;
  };

  // Reads attributes up to '>' or '/>'. Returns false on a fatal mishap that
  // prevents finishing the tag.
  bool read_attributes(std::vector<RawAttr>& out, const std::string& owner) {
    while (true) {
      skip_space();
      if (eof()) {
        error_here("unexpected end of input inside tag <" + owner + ">");
        return false;
      }
      if (peek() == '>' || starts_with("/>")) return true;
      std::size_t at_line = line, at_col = col;
      std::string name = read_name();
      if (name.empty()) {
        report(true, at_line, at_col,
               "expected an attribute name in tag <" + owner + ">");
        return false;
      }
      skip_space();
      if (peek() != '=') {
        report(true, at_line, at_col, "attribute '" + name + "' is missing '='");
        return false;
      }
      advance();
      skip_space();
      char quote = peek();
      if (quote != '"' && quote != '\'') {
        report(true, at_line, at_col, "attribute '" + name + "' value is not quoted");
        return false;
      }
      advance();
      std::string value;
      while (!eof() && peek() != quote) {
        if (peek() == '&') decode_entity(value);
        else if (peek() == '<') {
          report(true, line, col, "'<' inside the value of attribute '" + name + "'");
          return false;
        } else {
          value += peek();
          advance();
        }
      }
      if (eof()) {
        report(true, at_line, at_col, "unterminated value for attribute '" + name + "'");
        return false;
      }
      advance();  // closing quote
      for (const auto& existing : out)
        if (existing.name == name)
          report(true, at_line, at_col, "attribute '" + name + "' appears twice");
      out.push_back({std::move(name), std::move(value), at_line, at_col});
    }
  }

  void resolve_names(Element& el, const std::vector<RawAttr>& raw) {
    // Namespace declarations first so sibling attributes can use them.
    for (const auto& a : raw) {
      if (a.name == "xmlns") ns.bindings.emplace_back("", a.value);
      else if (a.name.rfind("xmlns:", 0) == 0)
        ns.bindings.emplace_back(a.name.substr(6), a.value);
    }
    auto split = [](const std::string& name) {
      auto colon = name.find(':');
      return colon == std::string::npos
                 ? std::pair<std::string, std::string>{"", name}
                 : std::pair<std::string, std::string>{name.substr(0, colon),
                                                       name.substr(colon + 1)};
    };
    auto [eprefix, elocal] = split(el.name);
    el.local = elocal;
    if (eprefix.empty()) {
      const std::string* uri = ns.lookup("");
      el.ns = uri ? *uri : "";
    } else if (eprefix == "xml") {
      el.ns = std::string(kXmlNs);
    } else {
      const std::string* uri = ns.lookup(eprefix);
      if (!uri)
        report(true, el.line, el.col, "undeclared namespace prefix '" + eprefix + "'");
      el.ns = uri ? *uri : "";
    }
    for (const auto& a : raw) {
      if (a.name == "xmlns" || a.name.rfind("xmlns:", 0) == 0) continue;
      Attribute attr;
      attr.name = a.name;
      attr.value = a.value;
      attr.line = a.line;
      attr.col = a.col;
      auto [aprefix, alocal] = split(a.name);
      attr.local = alocal;
      if (aprefix.empty()) {
        attr.ns = "";  // unprefixed attributes take no namespace
      } else if (aprefix == "xml") {
        attr.ns = std::string(kXmlNs);
      } else {
        const std::string* uri = ns.lookup(aprefix);
        if (!uri)
          report(true, a.line, a.col, "undeclared namespace prefix '" + aprefix + "'");
        attr.ns = uri ? *uri : "";
      }
      el.attributes.push_back(std::move(attr));
    }
  }

  // --- elements -----------------------------------------------------------------

  enum class CloseOutcome { closed, propagate, eof };

  // Parses one element whose '<' is at the cursor. `open` is the chain of
  // enclosing element names, used to recover from mismatched end tags.
  CloseOutcome parse_element(Element& el, std::vector<std::string>& open) {
    el.begin = pos;
    el.line = line;
    el.col = col;
    advance();  // '<'
    el.name = read_name();
    if (el.name.empty()) {
      error_here("expected an element name after '<'");
      return CloseOutcome::eof;
    }
    std::vector<RawAttr> raw;
    ns.push();
    if (!read_attributes(raw, el.name)) {
      ns.pop();
      return CloseOutcome::eof;
    }
    resolve_names(el, raw);
    if (starts_with("/>")) {
      advance(2);
      el.end = pos;
      ns.pop();
      return CloseOutcome::closed;
    }
    advance();  // '>'

    open.push_back(el.name);
    CloseOutcome outcome = parse_children(el, open);
    open.pop_back();
    ns.pop();
    if (outcome == CloseOutcome::closed) el.end = pos;
    return outcome;
  }

  CloseOutcome parse_children(Element& el, std::vector<std::string>& open) {
    while (true) {
      if (eof()) {
        error_here("unexpected end of input inside <" + el.name + ">");
        return CloseOutcome::eof;
      }
      if (peek() != '<') {
        // character data
        while (!eof() && peek() != '<') {
          if (peek() == '&') {
            decode_entity(el.text);
            el.has_nonspace_text = true;
          } else {
            if (!is_space(peek())) el.has_nonspace_text = true;
            el.text += peek();
            advance();
          }
        }
        continue;
      }
      if (starts_with("<!--")) {
        if (!skip_comment()) return CloseOutcome::eof;
        continue;
      }
      if (starts_with("<![CDATA[")) {
        std::size_t at_line = line, at_col = col;
        advance(9);
        std::size_t start = pos;
        while (!eof() && !starts_with("]]>")) advance();
        if (eof()) {
          report(true, at_line, at_col, "unterminated CDATA section");
          return CloseOutcome::eof;
        }
        std::string chunk = s.substr(start, pos - start);
        for (char c : chunk)
          if (!is_space(c)) el.has_nonspace_text = true;
        el.text += chunk;
        advance(3);
        continue;
      }
      if (starts_with("<?")) {
        if (!skip_pi()) return CloseOutcome::eof;
        continue;
      }
      if (starts_with("</")) {
        std::size_t at_line = line, at_col = col;
        std::size_t tag_begin = pos;
        advance(2);
        std::string name = read_name();
        skip_space();
        if (peek() != '>') {
          report(true, at_line, at_col, "malformed end tag '</" + name + "'");
          return CloseOutcome::eof;
        }
        advance();
        if (name == el.name) return CloseOutcome::closed;
        bool matches_ancestor =
            std::find(open.begin(), open.end() - 1, name) != open.end() - 1;
        if (matches_ancestor) {
          // Let an enclosing element claim this end tag; rewind past it.
          report(true, at_line, at_col,
                 "element <" + el.name + "> is not closed (found </" + name + ">)");
          pos = tag_begin;
          line = at_line;
          col = at_col;
          return CloseOutcome::propagate;
        }
        report(true, at_line, at_col,
               "mismatched end tag: expected </" + el.name + ">, found </" + name + ">");
        return CloseOutcome::closed;  // close-and-continue recovery
      }
      // a child element
      Element child;
      CloseOutcome outcome = parse_element(child, open);
      el.children.push_back(std::move(child));
      if (outcome == CloseOutcome::eof) return CloseOutcome::eof;
      if (outcome == CloseOutcome::propagate) {
        // The pending end tag may belong to this element.
        std::size_t at_line = line, at_col = col;
        std::size_t tag_begin = pos;
        advance(2);
        std::string name = read_name();
        skip_space();
        advance();  // '>' was verified before propagating
        if (name == el.name) return CloseOutcome::closed;
        pos = tag_begin;
        line = at_line;
        col = at_col;
        return CloseOutcome::propagate;
      }
    }
  }

  void run() {
    skip_space();
    bool seen_root = false;
    while (!eof()) {
      if (peek() != '<') {
        if (!is_space(peek())) {
          error_here("text content outside the root element");
          return;
        }
        advance();
        continue;
      }
      if (starts_with("<!--")) {
        if (!skip_comment()) return;
      } else if (starts_with("<?")) {
        if (!skip_pi()) return;
      } else if (starts_with("<!DOCTYPE")) {
        if (!skip_doctype()) return;
      } else if (starts_with("</")) {
        error_here("end tag outside the root element");
        return;
      } else {
        if (seen_root) {
          error_here("more than one root element");
          return;
        }
        seen_root = true;
        Element root;
        std::vector<std::string> open;
        CloseOutcome outcome = parse_element(root, open);
        if (outcome == CloseOutcome::propagate) {
          // An end tag propagated past the root can match nothing.
          advance(2);
          std::string name = read_name();
          skip_space();
          if (peek() == '>') advance();
          report(true, line, col, "stray end tag </" + name + ">");
        }
        doc.root = std::move(root);
        if (outcome == CloseOutcome::eof) return;
      }
      skip_space();
    }
    if (!seen_root) error_here("no root element");
  }
};

// Returns the encoding named in an XML declaration at the start of the input,
// lowercased, or empty when none is declared.
std::string sniff_declared_encoding(std::string_view bytes) {
  if (bytes.substr(0, 5) != "<?xml") return {};
  std::size_t close = bytes.find("?>");
  std::string_view decl = bytes.substr(0, close == std::string_view::npos ? bytes.size() : close);
  std::size_t at = decl.find("encoding");
  if (at == std::string_view::npos) return {};
  at = decl.find_first_of("\"'", at);
  if (at == std::string_view::npos) return {};
  char quote = decl[at];
  std::size_t end = decl.find(quote, at + 1);
  if (end == std::string_view::npos) return {};
  return lowercase(decl.substr(at + 1, end - at - 1));
}

}  // namespace

Document parse(std::string_view bytes) {
  Document doc;

  // Byte-order marks. UTF-16 content cannot be parsed as UTF-8; refuse it
  // outright rather than producing garbage names.
  if (bytes.size() >= 2) {
    unsigned char b0 = (unsigned char)bytes[0], b1 = (unsigned char)bytes[1];
    if ((b0 == 0xFF && b1 == 0xFE) || (b0 == 0xFE && b1 == 0xFF) ||
        (b0 == 0x00 && b1 == '<') || (b0 == '<' && b1 == 0x00)) {
      doc.diagnostics.push_back(
          {true, 1, 1, "UTF-16 input is not supported; re-encode as UTF-8"});
      return doc;
    }
  }
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);

  std::string enc = sniff_declared_encoding(bytes);
  if (enc.empty() || enc == "utf-8" || enc == "utf8") {
    doc.source.assign(bytes);
  } else if (enc == "us-ascii" || enc == "ascii") {
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      if ((unsigned char)bytes[i] >= 0x80) {
        std::size_t l = 1 + std::count(bytes.begin(), bytes.begin() + i, '\n');
        doc.diagnostics.push_back(
            {true, l, 1, "byte outside US-ASCII in input declared us-ascii"});
        return doc;
      }
    }
    doc.source.assign(bytes);
  } else if (enc == "iso-8859-1" || enc == "latin-1" || enc == "latin1") {
    doc.source.reserve(bytes.size());
    for (char c : bytes) {
      unsigned char b = (unsigned char)c;
      if (b < 0x80) {
        doc.source += c;
      } else {
        doc.source += char(0xC0 | (b >> 6));
        doc.source += char(0x80 | (b & 0x3F));
      }
    }
  } else {
    doc.diagnostics.push_back({true, 1, 1, "unsupported encoding '" + enc + "'"});
    return doc;
  }

  Parser p(doc.source, doc);
  p.run();
  if (doc.any_fatal() && doc.root && doc.root->name.empty()) doc.root.reset();
  return doc;
}

}  // namespace semrep::xmldom
