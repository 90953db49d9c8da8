#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "generators.hpp"
#include "semrep/model.hpp"
#include "semrep/xml.hpp"
#include "support.hpp"

using namespace semrep;

namespace {

SemRep parse_ok(const std::string& text, const FormatProfile& profile = {}) {
  ParseResult r = parse(text, profile);
  for (const auto& d : r.diagnostics) {
    CAPTURE(d.message);
    CHECK_FALSE(d.fatal);
  }
  REQUIRE(r.ok());
  return *r.doc;
}

bool has_fatal(const ParseResult& r, std::string_view needle) {
  return std::any_of(r.diagnostics.begin(), r.diagnostics.end(), [&](const xmldom::Diagnostic& d) {
    return d.fatal && d.message.find(needle) != std::string::npos;
  });
}

bool has_warning(const ParseResult& r, std::string_view needle) {
  return std::any_of(r.diagnostics.begin(), r.diagnostics.end(), [&](const xmldom::Diagnostic& d) {
    return !d.fatal && d.message.find(needle) != std::string::npos;
  });
}

// Wraps body elements in a well-formed document under the default profile.
std::string wrap(const std::string& body) {
  return "<semRep xmlns=\"urn:semrep:1\" id=\"d1\">" + body + "</semRep>";
}

const Node& node_of(const SemRep& doc, std::string_view id) {
  const Node* n = doc.find_node(id);
  REQUIRE(n != nullptr);
  return *n;
}

std::vector<std::string> values_of(const std::vector<Restriction>& rs, std::string_view category) {
  std::vector<std::string> out;
  for (const auto& r : rs)
    if (r.category == category) out.push_back(r.value.lexical);
  return out;
}

}  // namespace

TEST_CASE("interchange fixture parses to the expected structure") {
  ParseResult r = parse(testutil::fixture("golden.xml"));
  REQUIRE(r.ok());
  CHECK(r.diagnostics.empty());
  const SemRep& doc = *r.doc;
  CHECK(doc.id == "rep1");

  std::size_t events = 0, participants = 0;
  for (const auto& n : doc.nodes) (n.kind == NodeKind::event ? events : participants)++;
  CHECK(events == 2);
  CHECK(participants == 4);
  CHECK(doc.relations.size() == 3);
  CHECK(doc.alt_groups.size() == 1);
  CHECK(doc.variables.empty());

  const Node& e0 = node_of(doc, "e0");
  CHECK(e0.kind == NodeKind::event);
  CHECK(values_of(e0.restrictions, "evtCat") == std::vector<std::string>{"utterance"});
  REQUIRE(e0.meta.interactional.has_value());
  CHECK(e0.meta.interactional->speaker == "Peter");
  CHECK(e0.meta.interactional->addressees == std::vector<std::string>{"System"});

  const AltGroup& g = doc.alt_groups.front();
  CHECK(g.owner == "e0");
  REQUIRE(g.alternatives.size() == 2);
  CHECK(g.alternatives[0].cert == doctest::Approx(0.8));
  CHECK(values_of(g.alternatives[0].bundle, "dialAct") == std::vector<std::string>{"Order"});
  CHECK(g.alternatives[1].cert == doctest::Approx(0.3));
  CHECK(values_of(g.alternatives[1].bundle, "dialAct") == std::vector<std::string>{"Inform"});

  const Node& e1 = node_of(doc, "e1");
  CHECK(values_of(e1.restrictions, "tense") == std::vector<std::string>{"present"});
  CHECK(values_of(e1.restrictions, "voice") == std::vector<std::string>{"active"});
  CHECK(values_of(e1.restrictions, "wh") == std::vector<std::string>{"none"});
  CHECK(values_of(e1.restrictions, "evtType") == std::vector<std::string>{"wanttogo"});

  CHECK(values_of(node_of(doc, "x").restrictions, "lex") == std::vector<std::string>{"I"});
  CHECK(values_of(node_of(doc, "y").restrictions, "lex") == std::vector<std::string>{"Nancy"});
  CHECK(values_of(node_of(doc, "z").restrictions, "lex") == std::vector<std::string>{"Stuttgart"});

  // One role-bearing relation per participant of the motion event.
  std::vector<std::string> roles;
  for (const auto& rel : doc.relations) {
    CHECK(rel.target == "e1");
    auto vals = values_of(rel.restrictions, "role");
    REQUIRE(vals.size() == 1);
    roles.push_back(rel.source + "/" + vals[0]);
  }
  std::sort(roles.begin(), roles.end());
  CHECK(roles == std::vector<std::string>{"x/agent", "y/source", "z/goal"});
}

TEST_CASE("malformed transcript excerpt is rejected with tag diagnostics") {
  ParseResult r = parse(testutil::fixture("golden_malformed.xml"));
  CHECK_FALSE(r.ok());
  std::size_t mismatches = 0;
  for (const auto& d : r.diagnostics)
    if (d.fatal && d.message.find("mismatched end tag") != std::string::npos) {
      CHECK(d.message.find("</pers>") != std::string::npos);
      CHECK(d.message.find("</num>") != std::string::npos);
      CHECK(d.line > 0);
      ++mismatches;
    }
  CHECK(mismatches == 3);
}

TEST_CASE("parse then serialize round-trips canonical structure") {
  std::mt19937 rng(71);
  for (int iter = 0; iter < 150; ++iter) {
    SemRep doc = gen::random_doc(rng);
    std::string wire = serialize(doc);
    ParseResult r = parse(wire);
    for (const auto& d : r.diagnostics) {
      CAPTURE(d.message);
      CHECK_FALSE(d.fatal);
    }
    REQUIRE(r.ok());
    CHECK(canonical_equal(canonicalize(doc), *r.doc));
  }
}

TEST_CASE("serialization is deterministic and stable under reparsing") {
  std::mt19937 rng(72);
  for (int iter = 0; iter < 40; ++iter) {
    SemRep doc = gen::random_doc(rng);
    std::string s1 = serialize(doc);
    CHECK(s1 == serialize(doc));
    ParseResult r = parse(s1);
    REQUIRE(r.ok());
    CHECK(serialize(*r.doc) == s1);
    CHECK(s1.rfind("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n", 0) == 0);
  }
}

TEST_CASE("foreign-namespace material survives byte-exactly") {
  SemRep doc = parse_ok(testutil::fixture("extended.xml"));
  const Node& e1 = node_of(doc, "e1");
  REQUIRE(e1.extensions.size() == 1);
  CHECK(e1.extensions[0] ==
        "<x:prosody xmlns:x=\"http://example.org/prosody\" contour=\"rising\">\n"
        "      <x:pitch mean=\"220\"/>\n"
        "    </x:prosody>");
  REQUIRE(doc.extensions.size() == 1);
  CHECK(doc.extensions[0] == "<a:audit xmlns:a=\"http://example.org/audit\" reviewed=\"yes\"/>");

  std::string wire = serialize(doc);
  CHECK(wire.find(e1.extensions[0]) != std::string::npos);
  CHECK(wire.find(doc.extensions[0]) != std::string::npos);
  SemRep again = parse_ok(wire);
  CHECK(canonical_equal(doc, again));
  CHECK(node_of(again, "e1").extensions == e1.extensions);
}

TEST_CASE("custom markup profiles drive reading and writing") {
  FormatProfile custom = load_profile(testutil::fixture("custom.profile"));
  CHECK(custom.namespace_uri == "http://example.org/mmr");
  CHECK(custom.document_element == "mmr");
  CHECK(custom.event_element == "evt");
  CHECK(custom.participant_element == "part");
  CHECK(custom.group_element == "ambiguity");
  CHECK(custom.cert_attr == "confidence");
  CHECK(custom.relation_element == "relation");  // unlisted roles keep defaults
  CHECK(custom.id_attr == "id");

  SemRep doc = parse_ok(testutil::fixture("custom_profile.xml"), custom);
  const Node& e1 = node_of(doc, "e1");
  CHECK(e1.kind == NodeKind::event);
  CHECK(values_of(e1.restrictions, "tense") == std::vector<std::string>{"past"});
  REQUIRE(doc.alt_groups.size() == 1);
  CHECK(doc.alt_groups[0].alternatives.size() == 2);
  CHECK(doc.alt_groups[0].alternatives[0].cert == doctest::Approx(0.6));

  std::string wire = serialize(doc, custom);
  CHECK(wire.find("<mmr xmlns=\"http://example.org/mmr\"") != std::string::npos);
  CHECK(wire.find("<evt id=") != std::string::npos);
  CHECK(wire.find("confidence=\"0.6\"") != std::string::npos);
  CHECK(canonical_equal(doc, parse_ok(wire, custom)));

  // The same document re-expressed under the default vocabulary.
  std::string plain = serialize(doc);
  CHECK(plain.find("<semRep xmlns=\"urn:semrep:1\"") != std::string::npos);
  CHECK(canonical_equal(doc, parse_ok(plain)));

  // A document in a foreign vocabulary is not accepted by the default one.
  ParseResult wrong = parse(testutil::fixture("custom_profile.xml"));
  CHECK_FALSE(wrong.ok());
  CHECK(has_fatal(wrong, "expected a <semRep> document element"));
}

TEST_CASE("markup layer handles declarations, encodings, and entities") {
  SUBCASE("UTF-8 byte-order mark is skipped") {
    std::string text = "\xEF\xBB\xBF" + wrap("<event id=\"e\"/>");
    CHECK(parse(text).ok());
  }
  SUBCASE("UTF-16 input is refused") {
    for (std::string prefix : {std::string("\xFF\xFE"), std::string("\xFE\xFF"),
                               std::string("<\0", 2), std::string("\0<", 2)}) {
      ParseResult r = parse(prefix + "rest");
      CHECK_FALSE(r.ok());
      CHECK(has_fatal(r, "UTF-16"));
    }
  }
  SUBCASE("declared latin-1 text is transcoded") {
    std::string text = "<?xml version=\"1.0\" encoding=\"iso-8859-1\"?>" +
                       wrap("<participant id=\"p\"><lex>caf\xE9</lex></participant>");
    SemRep doc = parse_ok(text);
    CHECK(values_of(node_of(doc, "p").restrictions, "lex") ==
          std::vector<std::string>{"caf\xC3\xA9"});
  }
  SUBCASE("declared us-ascii input may not carry high bytes") {
    std::string text = "<?xml version=\"1.0\" encoding=\"us-ascii\"?>" +
                       wrap("<participant id=\"p\"><lex>caf\xE9</lex></participant>");
    ParseResult r = parse(text);
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "US-ASCII"));
  }
  SUBCASE("unsupported encodings are refused by name") {
    ParseResult r = parse("<?xml version=\"1.0\" encoding=\"utf-7\"?>" + wrap(""));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "unsupported encoding 'utf-7'"));
  }
  SUBCASE("document type declarations are ignored with a warning") {
    ParseResult r = parse("<!DOCTYPE semRep [<!ELEMENT semRep ANY>]>" + wrap("<event id=\"e\"/>"));
    CHECK(r.ok());
    CHECK(has_warning(r, "document type declaration ignored"));
  }
  SUBCASE("comments and processing instructions are transparent") {
    SemRep doc = parse_ok("<?pi data?><!-- hi -->" +
                          wrap("<!-- a --><event id=\"e\"/><?pi?>") + "<!-- tail -->");
    CHECK(doc.nodes.size() == 1);
  }
  SUBCASE("CDATA and entities decode into restriction values") {
    SemRep doc = parse_ok(wrap("<participant id=\"p\">"
                               "<lex><![CDATA[a <b> & c]]></lex>"
                               "<shade>&lt;&amp;&gt;&quot;&apos;&#65;&#x42;</shade>"
                               "</participant>"));
    CHECK(values_of(node_of(doc, "p").restrictions, "lex") ==
          std::vector<std::string>{"a <b> & c"});
    CHECK(values_of(node_of(doc, "p").restrictions, "shade") ==
          std::vector<std::string>{"<&>\"'AB"});
  }
  SUBCASE("unknown entities are fatal") {
    ParseResult r = parse(wrap("<participant id=\"p\"><lex>&nope;</lex></participant>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "unknown entity '&nope;'"));
  }
  SUBCASE("repeated attributes are fatal") {
    ParseResult r = parse("<semRep xmlns=\"urn:semrep:1\" id=\"a\" id=\"b\"/>");
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "appears twice"));
  }
  SUBCASE("a raw '<' inside an attribute value is fatal") {
    ParseResult r = parse("<semRep xmlns=\"urn:semrep:1\" id=\"a<b\"/>");
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "'<' inside the value"));
  }
  SUBCASE("mismatched end tags are fatal but do not hide later errors") {
    ParseResult r = parse(wrap("<event id=\"e\"><tense>past</voice></event>"
                               "<event id=\"e2\"><num>sing</pers></event>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "mismatched end tag: expected </tense>, found </voice>"));
    CHECK(has_fatal(r, "mismatched end tag: expected </num>, found </pers>"));
  }
  SUBCASE("an unclosed element is reported against its open tag") {
    ParseResult r = parse("<semRep xmlns=\"urn:semrep:1\"><event id=\"e\"></semRep>");
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "element <event> is not closed (found </semRep>)"));
  }
  SUBCASE("undeclared namespace prefixes are fatal") {
    ParseResult r = parse(wrap("<q:thing/>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "undeclared namespace prefix 'q'"));
  }
  SUBCASE("empty input has no document element") {
    CHECK_FALSE(parse("").ok());
    CHECK_FALSE(parse("   \n  ").ok());
  }
  SUBCASE("multiple root elements are fatal") {
    ParseResult r = parse(wrap("") + wrap(""));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "more than one root element"));
  }
}

TEST_CASE("reader rejects structural misuse on well-formed markup") {
  SUBCASE("stray text inside the document element") {
    ParseResult r = parse(wrap("<event id=\"e\"/> ... "));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "unexpected text content inside <semRep>: '...'"));
  }
  SUBCASE("stray text inside a node") {
    ParseResult r = parse(wrap("<event id=\"e\"> hmm <tense>past</tense></event>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "unexpected text content inside <event>"));
  }
  SUBCASE("alternatives cannot sit at document level") {
    ParseResult r = parse(wrap("<alt><choice cert=\"1\"><c>v</c></choice></alt>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "needs an owning node"));
  }
  SUBCASE("unknown structural elements at document level") {
    ParseResult r = parse(wrap("<choice cert=\"1\"/>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "unexpected element <choice> at document level"));
  }
  SUBCASE("duplicate metadata blocks") {
    ParseResult r = parse(wrap("<event id=\"e\"><meta/><meta/></event>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "duplicate <meta> on <event>"));
    ParseResult r2 = parse(wrap("<meta/><meta/>"));
    CHECK_FALSE(r2.ok());
    CHECK(has_fatal(r2, "duplicate document-level <meta>"));
  }
  SUBCASE("unknown metadata elements") {
    ParseResult r = parse(wrap("<event id=\"e\"><meta><mood holder=\"x\"/></meta></event>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "unknown metadata element <mood>"));
  }
  SUBCASE("metadata numbers must parse") {
    ParseResult r = parse(wrap("<meta><environment time=\"soon\"/></meta>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "time 'soon' is not an integer millisecond count"));
    ParseResult r2 = parse(wrap("<meta><processing confidence=\"high\"/></meta>"));
    CHECK_FALSE(r2.ok());
    CHECK(has_fatal(r2, "confidence 'high' is not a number"));
  }
  SUBCASE("relations need both endpoints and take only restrictions") {
    ParseResult r = parse(wrap("<event id=\"e\"/><relation source=\"e\"/>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "needs both source and target"));
    ParseResult r2 = parse(
        wrap("<event id=\"e\"/><relation source=\"e\" target=\"e\"><link/></relation>"));
    CHECK_FALSE(r2.ok());
    CHECK(has_fatal(r2, "<link> is not allowed inside <relation>"));
  }
  SUBCASE("restrictions hold a single text value") {
    ParseResult r = parse(wrap("<event id=\"e\"><tense><inner/></tense></event>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "must hold a text value, not elements"));
    ParseResult r2 = parse(wrap("<event id=\"e\"><ref target=\"e\">txt</ref></event>"));
    CHECK_FALSE(r2.ok());
    CHECK(has_fatal(r2, "has both a target attribute and text"));
    ParseResult r3 = parse(wrap("<event id=\"e\"><ref target=\"9bad\"/></event>"));
    CHECK_FALSE(r3.ok());
    CHECK(has_fatal(r3, "target '9bad' is not a valid identifier"));
  }
  SUBCASE("links need a kind and a resolvable target") {
    ParseResult r = parse(wrap("<event id=\"e\"><link kind=\"lowerLevel\"/></event>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "needs both kind and href"));
    ParseResult r2 =
        parse(wrap("<event id=\"e\"><link kind=\"sideways\" href=\"x#y\"/></event>"));
    CHECK_FALSE(r2.ok());
    CHECK(has_fatal(r2, "unknown link kind 'sideways'"));
    ParseResult r3 =
        parse(wrap("<event id=\"e\"><link kind=\"lowerLevel\" href=\"plain\"/></event>"));
    CHECK_FALSE(r3.ok());
    CHECK(has_fatal(r3, "neither a scheme nor a fragment"));
  }
  SUBCASE("variables are attribute-only") {
    ParseResult r = parse(wrap("<event id=\"e\"/><var id=\"v\"/>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "missing its domain attribute"));
    ParseResult r2 = parse(wrap("<event id=\"e\"/><var id=\"v\" domain=\"e\"><x/></var>"));
    CHECK_FALSE(r2.ok());
    CHECK(has_fatal(r2, "does not take child elements"));
  }
  SUBCASE("certainties must be numbers") {
    ParseResult r = parse(
        wrap("<event id=\"e\"><alt><choice cert=\"maybe\"><c>v</c></choice></alt></event>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "certainty 'maybe' is not a number"));
  }
  SUBCASE("documents with bad identifiers never assemble") {
    ParseResult r = parse("<semRep xmlns=\"urn:semrep:1\" id=\"9no\"/>");
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "document identifier '9no' is not a token"));
  }
}

TEST_CASE("integrity findings surface as parse diagnostics with rule tags") {
  SUBCASE("duplicate identifiers") {
    ParseResult r = parse(wrap("<event id=\"e\"/><participant id=\"e\"/>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "[duplicate-id]"));
  }
  SUBCASE("dangling relation endpoints") {
    ParseResult r = parse(wrap("<event id=\"e\"/><relation source=\"e\" target=\"ghost\"/>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "[dangling-reference]"));
  }
  SUBCASE("certainty out of range") {
    ParseResult r = parse(
        wrap("<event id=\"e\"><alt><choice cert=\"1.5\"><c>v</c></choice></alt></event>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "[cert-range]"));
  }
  SUBCASE("empty alternative groups") {
    ParseResult r = parse(wrap("<event id=\"e\"><alt/></event>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "[empty-alternatives]"));
  }
  SUBCASE("temporal extents only on events, with ordered bounds") {
    ParseResult r = parse(wrap("<participant id=\"p\" start=\"1\" end=\"2\"/>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "[extent-on-participant]"));
    ParseResult r2 = parse(wrap("<event id=\"e\" start=\"9\" end=\"2\"/>"));
    CHECK_FALSE(r2.ok());
    CHECK(has_fatal(r2, "[extent-order]"));
    ParseResult r3 = parse(wrap("<event id=\"e\" start=\"1\"/>"));
    CHECK_FALSE(r3.ok());
    CHECK(has_fatal(r3, "carries only one of start/end"));
  }
  SUBCASE("variable domains must resolve to distinct nodes") {
    ParseResult r = parse(wrap("<event id=\"e\"/><var id=\"v\" domain=\"e e\"/>"));
    CHECK_FALSE(r.ok());
    CHECK(has_fatal(r, "[duplicate-domain]"));
    ParseResult r2 = parse(wrap("<event id=\"e\"/><var id=\"v\" domain=\"ghost\"/>"));
    CHECK_FALSE(r2.ok());
    CHECK(has_fatal(r2, "[dangling-reference]"));
  }
}

TEST_CASE("reader accepts conveniences and flags oddities as warnings") {
  SUBCASE("unknown structural attributes warn without rejecting") {
    ParseResult r = parse(wrap("<event id=\"e\" bogus=\"1\"/>"));
    CHECK(r.ok());
    CHECK(has_warning(r, "unknown attribute 'bogus' on <event>"));
  }
  SUBCASE("xml:lang becomes a lang restriction") {
    SemRep doc = parse_ok(wrap("<participant id=\"p\"><lex xml:lang=\"de\">Hallo</lex>"
                               "</participant>"));
    CHECK(values_of(node_of(doc, "p").restrictions, "lang") == std::vector<std::string>{"de"});
  }
  SUBCASE("alternative shorthand without choice wrappers") {
    SemRep doc = parse_ok(wrap("<event id=\"e\"><alt>"
                               "<dialAct cert=\"0.8\">Order</dialAct>"
                               "<dialAct cert=\"0.3\">Inform</dialAct>"
                               "</alt></event>"));
    REQUIRE(doc.alt_groups.size() == 1);
    const AltGroup& g = doc.alt_groups[0];
    REQUIRE(g.alternatives.size() == 2);
    CHECK(g.alternatives[0].cert == doctest::Approx(0.8));
    CHECK(g.alternatives[1].cert == doctest::Approx(0.3));
    CHECK(values_of(g.alternatives[0].bundle, "dialAct") == std::vector<std::string>{"Order"});

    // The full form with explicit wrappers reads identically.
    SemRep full = parse_ok(wrap("<event id=\"e\"><alt>"
                                "<choice cert=\"0.8\"><dialAct>Order</dialAct></choice>"
                                "<choice cert=\"0.3\"><dialAct>Inform</dialAct></choice>"
                                "</alt></event>"));
    CHECK(canonical_equal(doc, full));
  }
  SUBCASE("shorthand alternatives default to certainty one") {
    SemRep doc = parse_ok(wrap("<event id=\"e\"><alt><dialAct>Order</dialAct></alt></event>"));
    REQUIRE(doc.alt_groups.size() == 1);
    CHECK(doc.alt_groups[0].alternatives[0].cert == doctest::Approx(1.0));
  }
  SUBCASE("elements without identifiers receive generated ones") {
    SemRep doc = parse_ok(wrap("<event/><participant/>"
                               "<relation source=\"n1\" target=\"n2\"/>"));
    CHECK(doc.find_node("n1") != nullptr);
    CHECK(doc.find_node("n2") != nullptr);
    REQUIRE(doc.relations.size() == 1);
    CHECK(doc.relations[0].id == "r1");
  }
  SUBCASE("the profile namespace may be left implicit") {
    ParseResult r = parse("<semRep id=\"d\"><event id=\"e\"/></semRep>");
    CHECK(r.ok());
    CHECK(r.doc->nodes.size() == 1);
  }
}

TEST_CASE("link values split target and fragment") {
  ExternalLink l = parse_link("speech.wav#t=1.2,1.9", "lowerLevel");
  CHECK(l.kind == LinkKind::lower_level);
  CHECK(l.target == "speech.wav");
  REQUIRE(l.fragment.has_value());
  CHECK(*l.fragment == "t=1.2,1.9");
  CHECK(link_href(l) == "speech.wav#t=1.2,1.9");

  ExternalLink m = parse_link("http://example.org/world", "domainModel");
  CHECK(m.kind == LinkKind::domain_model);
  CHECK(m.target == "http://example.org/world");
  CHECK_FALSE(m.fragment.has_value());
  CHECK(link_href(m) == "http://example.org/world");

  CHECK_THROWS_AS(parse_link("x#y", "upward"), Error);
  CHECK_THROWS_AS(parse_link("no-scheme-no-fragment", "domainModel"), Error);
  try {
    parse_link("no-scheme-no-fragment", "domainModel");
  } catch (const Error& e) {
    CHECK(e.code == Errc::invalid_uri);
  }
}

TEST_CASE("profile loading validates roles and names") {
  CHECK_THROWS_AS(load_profile("<nope/>"), Error);
  CHECK_THROWS_AS(load_profile("<profile><element role=\"tower\" name=\"t\"/></profile>"), Error);
  CHECK_THROWS_AS(load_profile("<profile><element role=\"event\"/></profile>"), Error);
  CHECK_THROWS_AS(load_profile("<profile><entry role=\"event\" name=\"e\"/></profile>"), Error);
  CHECK_THROWS_AS(load_profile("<profile><element role=\"event\" name=\"relation\"/></profile>"),
                  Error);  // two structural roles may not share a name
  try {
    load_profile("<profile><element role=\"tower\" name=\"t\"/></profile>");
  } catch (const Error& e) {
    CHECK(e.code == Errc::parse_error);
    CHECK(std::string(e.what()).find("unknown profile element role 'tower'") !=
          std::string::npos);
  }

  FormatProfile renamed = load_profile(
      "<profile><attribute role=\"cert\" name=\"p\"/></profile>");
  CHECK(renamed.cert_attr == "p");
  CHECK(renamed.namespace_uri == "urn:semrep:1");

  FormatProfile clash;
  clash.event_element = clash.participant_element;
  CHECK_THROWS_AS(check_profile(clash), Error);
  FormatProfile bad_name;
  bad_name.meta_element = "not a name";
  CHECK_THROWS_AS(check_profile(bad_name), Error);
}

TEST_CASE("serializer refuses categories that collide with markup names") {
  SemRep doc;
  std::string e = add_node(doc, NodeKind::event);
  add_restriction(doc, e, "meta", Value::token("x"));
  CHECK_THROWS_AS(serialize(doc), Error);
  try {
    serialize(doc);
  } catch (const Error& err) {
    CHECK(err.code == Errc::invalid_argument);
  }

  // Under a renaming profile the default names become available — and the
  // renamed ones stop being usable as categories.
  FormatProfile custom = load_profile(testutil::fixture("custom.profile"));
  SemRep doc2;
  std::string e2 = add_node(doc2, NodeKind::event);
  add_restriction(doc2, e2, "event", Value::token("x"));
  CHECK_NOTHROW(serialize(doc2, custom));
  CHECK_THROWS_AS(serialize(doc2), Error);
  SemRep doc3;
  std::string e3 = add_node(doc3, NodeKind::event);
  add_restriction(doc3, e3, "evt", Value::token("x"));
  CHECK_THROWS_AS(serialize(doc3, custom), Error);
  CHECK_NOTHROW(serialize(doc3));
}

TEST_CASE("mutated documents never crash the parser") {
  const std::string base = testutil::fixture("golden.xml");
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> edit_count(1, 4);
  std::uniform_int_distribution<int> op_pick(0, 2);
  const std::string alphabet = "<>&\"'=/ abzXML109#;\xC3\xA9\xFF";
  std::uniform_int_distribution<std::size_t> char_pick(0, alphabet.size() - 1);

  int parsed_ok = 0;
  for (int iter = 0; iter < 500; ++iter) {
    std::string mutant = base;
    int edits = edit_count(rng);
    for (int k = 0; k < edits && !mutant.empty(); ++k) {
      std::uniform_int_distribution<std::size_t> pos_pick(0, mutant.size() - 1);
      std::size_t at = pos_pick(rng);
      switch (op_pick(rng)) {
        case 0: mutant[at] = alphabet[char_pick(rng)]; break;
        case 1: mutant.insert(at, 1, alphabet[char_pick(rng)]); break;
        default: mutant.erase(at, 1); break;
      }
    }
    ParseResult r = parse(mutant);
    if (!r.ok()) continue;
    ++parsed_ok;
    // Accepted mutants must still satisfy the integrity backstop and keep a
    // working serialize/reparse cycle (serialization may legitimately refuse
    // a mutant whose category now collides with a markup name).
    CHECK(check_integrity(*r.doc).empty());
    try {
      std::string wire = serialize(*r.doc);
      ParseResult again = parse(wire);
      REQUIRE(again.ok());
      CHECK(canonical_equal(*r.doc, *again.doc));
    } catch (const Error& e) {
      CHECK(e.code == Errc::invalid_argument);
    }
  }
  // The corpus should contain survivors (whitespace and text edits), or the
  // exercise proves nothing.
  CHECK(parsed_ok > 0);
}
