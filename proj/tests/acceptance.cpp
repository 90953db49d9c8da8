// End-to-end guarantees of the toolkit, one per line: the golden fixture's
// parse counts and reading scores, rejection of the malformed fixture,
// serialization round-trips, reading enumeration against a brute-force
// oracle, the fusion algebra, narrowing monotonicity, registry growth,
// metadata irrelevance, and the collective-quantifier encoding.
//
// Prints PASS/FAIL per guarantee; the exit code is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "generators.hpp"
#include "oracles.hpp"
#include "semrep/fusion.hpp"
#include "semrep/model.hpp"
#include "semrep/registry.hpp"
#include "semrep/underspec.hpp"
#include "semrep/xml.hpp"
#include "support.hpp"

using namespace semrep;

namespace {

struct Check {
  std::vector<std::string> failures;

  void require(bool cond, const std::string& what) {
    if (!cond) failures.push_back(what);
  }
  void fail(const std::string& what) { failures.push_back(what); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SemRep fixture_doc(const std::string& name) {
  ParseResult r = parse(testutil::fixture(name));
  if (!r.ok()) throw Error(Errc::parse_error, "fixture does not parse: " + name);
  return *r.doc;
}

bool has_restriction(const SemRep& doc, const std::string& node, const std::string& cat,
                     const std::string& value) {
  const Node* n = doc.find_node(node);
  if (!n) return false;
  for (const auto& r : n->restrictions)
    if (r.category == cat && r.value.lexical == value) return true;
  return false;
}

// ---- 1. golden fixture ------------------------------------------------------

void golden_fixture(Check& c) {
  auto t0 = std::chrono::steady_clock::now();
  SemRep doc = fixture_doc("golden.xml");

  std::size_t events = 0, participants = 0;
  for (const auto& n : doc.nodes) (n.kind == NodeKind::event ? events : participants)++;
  c.require(events == 2, "expected 2 events, got " + std::to_string(events));
  c.require(participants == 4, "expected 4 participants, got " + std::to_string(participants));
  c.require(doc.relations.size() == 3,
            "expected 3 relations, got " + std::to_string(doc.relations.size()));
  c.require(doc.alt_groups.size() == 1,
            "expected 1 alternative group, got " + std::to_string(doc.alt_groups.size()));
  c.require(doc.alt_groups.size() == 1 && doc.alt_groups[0].alternatives.size() == 2,
            "expected 2 alternatives in the group");

  ReadingSet rs = enumerate_readings(doc);
  c.require(rs.readings.size() == 2,
            "expected 2 readings, got " + std::to_string(rs.readings.size()));
  if (rs.readings.size() == 2) {
    c.require(format_number(rs.readings[0].score) == "0.8",
              "first reading score " + format_number(rs.readings[0].score) + ", want 0.8");
    c.require(format_number(rs.readings[1].score) == "0.3",
              "second reading score " + format_number(rs.readings[1].score) + ", want 0.3");
    c.require(has_restriction(rs.readings[0].rep, "e0", "dialAct", "Order"),
              "first reading should resolve e0 to dialAct=Order");
    c.require(has_restriction(rs.readings[1].rep, "e0", "dialAct", "Inform"),
              "second reading should resolve e0 to dialAct=Inform");
  }

  GroundRep best = best_reading(doc);
  c.require(format_number(best.score) == "0.8", "best reading should score 0.8");
  c.require(has_restriction(best.rep, "e0", "dialAct", "Order"),
            "best reading should pick dialAct=Order");

  double dt = seconds_since(t0);
  c.require(dt < 1.0, "took " + std::to_string(dt) + "s, budget is 1s");
}

// ---- 2. malformed fixture ----------------------------------------------------

void malformed_fixture(Check& c) {
  ParseResult r = parse(testutil::fixture("golden_malformed.xml"));
  c.require(!r.ok(), "the malformed fixture must not parse");
  std::size_t fatal = 0, located = 0;
  for (const auto& d : r.diagnostics) {
    if (!d.fatal) continue;
    ++fatal;
    if (d.message.find("mismatched end tag") != std::string::npos &&
        d.message.find("</num>") != std::string::npos && d.line > 0)
      ++located;
  }
  c.require(fatal >= 1, "expected at least one fatal diagnostic");
  c.require(located >= 1, "diagnostics should name the mismatched tag and its location");
}

// ---- 3. round-trip ------------------------------------------------------------

void round_trip(Check& c) {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(1003);
  for (int i = 0; i < 1000; ++i) {
    SemRep doc = gen::random_doc(rng);
    ParseResult back = parse(serialize(doc));
    if (!back.ok()) {
      c.fail("iteration " + std::to_string(i) + ": serialized document did not parse");
      return;
    }
    if (!canonical_equal(canonicalize(doc), *back.doc)) {
      c.fail("iteration " + std::to_string(i) + ": round-trip is not canonical-equal");
      return;
    }
  }
  double dt = seconds_since(t0);
  c.require(dt < 30.0, "took " + std::to_string(dt) + "s, budget is 30s");
}

// ---- 4. reading oracle --------------------------------------------------------

void reading_oracle(Check& c) {
  std::mt19937 rng(1004);
  for (int i = 0; i < 500; ++i) {
    SemRep doc = gen::random_doc(rng);
    std::vector<oracle::OracleReading> expected = oracle::oracle_readings(doc);
    std::uint64_t counted = reading_count(doc);
    if (counted != expected.size()) {
      c.fail("iteration " + std::to_string(i) + ": reading_count says " +
             std::to_string(counted) + ", oracle says " + std::to_string(expected.size()));
      return;
    }
    ReadingSet rs = enumerate_readings(doc, std::max<std::size_t>(expected.size(), 1));
    if (rs.readings.size() != expected.size() || !rs.exhaustive) {
      c.fail("iteration " + std::to_string(i) + ": enumeration size mismatch");
      return;
    }
    for (std::size_t k = 0; k < expected.size(); ++k) {
      if (std::abs(rs.readings[k].score - expected[k].score) > 1e-12) {
        c.fail("iteration " + std::to_string(i) + ", reading " + std::to_string(k) +
               ": score off by more than 1e-12");
        return;
      }
      if (!canonical_equal(rs.readings[k].rep, expected[k].rep)) {
        c.fail("iteration " + std::to_string(i) + ", reading " + std::to_string(k) +
               ": materialized reading differs from the oracle");
        return;
      }
    }
  }
}

// ---- 5. fusion algebra --------------------------------------------------------

void fusion_algebra(Check& c) {
  std::mt19937 rng(1005);
  SemRep empty;

  // Conflict-free pairs: identity, commutativity, oracle agreement.
  for (int i = 0; i < 120; ++i) {
    gen::FusionCase fc = gen::fusion_case(rng, 2);
    const Correspondence& corr = fc.corr[{0, 1}];
    if (!oracle::oracle_conflicts(fc.docs[0], fc.docs[1], corr, fc.reg).empty()) {
      c.fail("pair " + std::to_string(i) + ": generator emitted a conflicted case");
      return;
    }
    MergeResult lr = merge(fc.docs[0], fc.docs[1], corr, fc.reg);
    MergeResult rl = merge(fc.docs[1], fc.docs[0], gen::flip(corr), fc.reg);
    if (!lr.ok() || !rl.ok()) {
      c.fail("pair " + std::to_string(i) + ": merge reported a conflict the oracle rejects");
      return;
    }
    if (!isomorphic(*lr.doc, *rl.doc)) {
      c.fail("pair " + std::to_string(i) + ": merge is not commutative");
      return;
    }
    MergeResult idl = merge(fc.docs[0], empty, Correspondence{}, fc.reg);
    MergeResult idr = merge(empty, fc.docs[0], Correspondence{}, fc.reg);
    if (!idl.ok() || !idr.ok() || !isomorphic(*idl.doc, fc.docs[0]) ||
        !isomorphic(*idr.doc, fc.docs[0])) {
      c.fail("pair " + std::to_string(i) + ": the empty document is not a merge identity");
      return;
    }
  }

  // Conflict-free triples: associativity.
  for (int i = 0; i < 80; ++i) {
    gen::FusionCase fc = gen::fusion_case(rng, 3);
    Correspondence c01 = fc.corr[{0, 1}], c02 = fc.corr[{0, 2}], c12 = fc.corr[{1, 2}];
    MergeResult ab = merge(fc.docs[0], fc.docs[1], c01, fc.reg);
    Correspondence to_c = c02;
    to_c.pairs.insert(to_c.pairs.end(), c12.pairs.begin(), c12.pairs.end());
    MergeResult left = ab.ok() ? merge(*ab.doc, fc.docs[2], to_c, fc.reg) : MergeResult{};
    MergeResult bc = merge(fc.docs[1], fc.docs[2], c12, fc.reg);
    Correspondence from_a = c01;
    from_a.pairs.insert(from_a.pairs.end(), c02.pairs.begin(), c02.pairs.end());
    MergeResult right = bc.ok() ? merge(fc.docs[0], *bc.doc, from_a, fc.reg) : MergeResult{};
    if (!left.ok() || !right.ok()) {
      c.fail("triple " + std::to_string(i) + ": a conflict-free triple failed to merge");
      return;
    }
    if (!isomorphic(*left.doc, *right.doc)) {
      c.fail("triple " + std::to_string(i) + ": merge is not associative");
      return;
    }
  }

  // Injected contradictions: reported, and confirmed by the brute-force checker.
  int broken = 0;
  for (int i = 0; i < 120 && broken < 60; ++i) {
    gen::FusionCase fc = gen::fusion_case(rng, 2);
    if (!gen::break_case(rng, fc, static_cast<gen::Breakage>(i % 3))) continue;
    ++broken;
    const Correspondence& corr = fc.corr[{0, 1}];
    std::vector<oracle::OracleConflict> predicted =
        oracle::oracle_conflicts(fc.docs[0], fc.docs[1], corr, fc.reg);
    if (predicted.empty()) {
      c.fail("broken pair " + std::to_string(i) + ": oracle missed the injected conflict");
      return;
    }
    MergeResult res = merge(fc.docs[0], fc.docs[1], corr, fc.reg);
    if (res.ok()) {
      c.fail("broken pair " + std::to_string(i) + ": merge missed the injected conflict");
      return;
    }
    for (const Conflict& conflict : res.conflicts.conflicts) {
      if (!oracle::oracle_confirms(conflict, predicted)) {
        c.fail("broken pair " + std::to_string(i) + ": unconfirmed conflict: " + conflict.str());
        return;
      }
    }
  }
  c.require(broken >= 60, "only " + std::to_string(broken) + " breakable cases generated");
}

// ---- 6. narrowing monotonicity -------------------------------------------------

std::string reading_key(const GroundRep& g) {
  return format_number(g.score) + "\n" + serialize(g.rep);
}

void narrowing_monotonic(Check& c) {
  std::mt19937 rng(1006);
  const std::size_t cap = 200000;
  for (int i = 0; i < 200; ++i) {
    SemRep doc = gen::random_doc(rng);
    if (doc.alt_groups.empty() && doc.variables.empty()) {
      --i;
      continue;
    }
    ReadingSet pre = enumerate_readings(doc, cap);
    std::multiset<std::string> pre_keys;
    for (const auto& g : pre.readings) pre_keys.insert(reading_key(g));

    SemRep after;
    const bool use_group =
        !doc.alt_groups.empty() && (doc.variables.empty() || gen::chance(rng, 0.5));
    if (use_group) {
      const AltGroup& g = doc.alt_groups[gen::pick(rng, 0, int(doc.alt_groups.size()) - 1)];
      after = prune(doc, g.id, gen::pick(rng, 0, int(g.alternatives.size()) - 1));
    } else {
      const LabelVariable& v = doc.variables[gen::pick(rng, 0, int(doc.variables.size()) - 1)];
      after = semrep::bind(doc, v.id, v.domain[gen::pick(rng, 0, int(v.domain.size()) - 1)]);
    }

    ReadingSet post = enumerate_readings(after, cap);
    if (post.readings.size() > pre.readings.size()) {
      c.fail("iteration " + std::to_string(i) + ": the step grew the reading set");
      return;
    }
    for (const auto& g : post.readings) {
      auto it = pre_keys.find(reading_key(g));
      if (it == pre_keys.end()) {
        c.fail("iteration " + std::to_string(i) + ": a post-step reading is not a pre-step one");
        return;
      }
      pre_keys.erase(it);
    }
  }
}

// ---- 7. registry growth ---------------------------------------------------------

void registry_growth(Check& c) {
  std::mt19937 rng(1007);
  for (int i = 0; i < 100; ++i) {
    SemRep doc = gen::random_doc(rng);
    Registry reg = gen::registry_for(doc);
    ValidationReport before = validate(doc, reg, /*strict=*/true);
    if (before.level != ValidationLevel::valid || !before.findings.empty()) {
      c.fail("iteration " + std::to_string(i) + ": generated pair does not validate cleanly");
      return;
    }
    gen::extend_registry(rng, reg, gen::pick(rng, 1, 5));
    ValidationReport after = validate(doc, reg, /*strict=*/true);
    if (after.level != ValidationLevel::valid || !after.findings.empty()) {
      c.fail("iteration " + std::to_string(i) + ": fresh categories broke validation");
      return;
    }
  }
}

// ---- 8. metadata irrelevance ----------------------------------------------------

std::vector<AssertionSet> denotations_of(const SemRep& doc) {
  ReadingSet rs = enumerate_readings(doc, 200000);
  std::vector<AssertionSet> out;
  for (const auto& g : rs.readings) out.push_back(denote(g));
  return out;
}

void metadata_irrelevance(Check& c) {
  const std::vector<std::string> fixtures = {
      "golden.xml",  "speech.xml",        "gesture.xml",  "prosody_agree.xml",
      "prosody_clash.xml", "extended.xml", "variable.xml"};
  for (const auto& name : fixtures) {
    SemRep doc = fixture_doc(name);
    std::vector<AssertionSet> baseline = denotations_of(doc);

    SemRep stripped = doc;
    stripped.meta = {};
    for (auto& n : stripped.nodes) n.meta = {};

    SemRep stuffed = doc;
    MetaBlock noisy;
    noisy.environment = EnvironmentMeta{98765, "somewhere else"};
    noisy.processing = ProcessingMeta{"probe", 0.5};
    noisy.interactional = InteractionalMeta{"alice", {"bob", "carol"}};
    stuffed.meta = noisy;
    for (auto& n : stuffed.nodes) n.meta = noisy;

    SemRep tweaked = doc;
    if (!tweaked.meta.processing) tweaked.meta.processing = ProcessingMeta{};
    tweaked.meta.processing->confidence = 0.123;

    for (const SemRep* mutant : {&stripped, &stuffed, &tweaked}) {
      if (denotations_of(*mutant) != baseline) {
        c.fail(name + ": a metadata mutation changed a reading's denotation");
        return;
      }
    }
  }
}

// ---- 9. collective quantifier ----------------------------------------------------

void collective_quantifier(Check& c) {
  SemRep doc;
  std::string event = add_node(doc, NodeKind::event);
  add_restriction(doc, event, "evtType", Value::token("move"));
  std::string group = encode_collective_quantifier(doc, event, 3, "man");

  const Node* g = doc.find_node(group);
  c.require(g != nullptr && g->kind == NodeKind::participant,
            "the encoded group should be a participant node");
  c.require(check_integrity(doc).empty(), "the encoded document should pass integrity");

  AssertionSet d = denote({doc, 1.0});
  c.require(d.count(Assertion::restr(group, "cardinality", "3")) == 1,
            "denotation should carry cardinality=3 on the group");
  c.require(d.count(Assertion::restr(group, "collectivity", "collective")) == 1,
            "denotation should carry collectivity=collective on the group");
  c.require(d.count(Assertion::restr(group, "memberType", "man")) == 1,
            "denotation should carry memberType=man on the group");
  c.require(d.count(Assertion::rel(group, event, "role", "agent")) == 1,
            "the group should relate to the event with role=agent");

  SemRep one;
  std::string e1 = add_node(one, NodeKind::event);
  std::string singleton = encode_collective_quantifier(one, e1, 1, "man");
  c.require(has_restriction(one, singleton, "cardinality", "1"),
            "a singleton group should carry cardinality=1");
  try {
    encode_collective_quantifier(one, e1, 0, "man");
    c.fail("a zero-member group should be rejected");
  } catch (const Error& err) {
    c.require(err.code == Errc::invalid_count, "zero members should raise InvalidCount");
  }
}

}  // namespace

int main() {
  struct Guarantee {
    const char* label;
    std::function<void(Check&)> body;
  };
  const std::vector<Guarantee> guarantees = {
      {"golden fixture: counts, reading scores, best reading (<1s)", golden_fixture},
      {"malformed fixture is rejected with located diagnostics", malformed_fixture},
      {"1000 random documents round-trip through serialization (<30s)", round_trip},
      {"500 random documents: enumeration matches the brute-force oracle", reading_oracle},
      {"fusion algebra: identity, commutativity, associativity, conflict soundness",
       fusion_algebra},
      {"200 narrowing steps only ever shrink the reading set", narrowing_monotonic},
      {"100 clean registries stay clean under fresh-category growth", registry_growth},
      {"metadata mutations never change any reading's denotation", metadata_irrelevance},
      {"collective quantifier encodes cardinality and collectivity on the agent group",
       collective_quantifier},
  };

  auto suite_start = std::chrono::steady_clock::now();
  int failures = 0;
  for (std::size_t i = 0; i < guarantees.size(); ++i) {
    Check check;
    auto t0 = std::chrono::steady_clock::now();
    try {
      guarantees[i].body(check);
    } catch (const std::exception& e) {
      check.fail(std::string("unexpected exception: ") + e.what());
    }
    double dt = seconds_since(t0);
    if (check.failures.empty()) {
      std::printf("PASS  %zu. %s (%.2fs)\n", i + 1, guarantees[i].label, dt);
    } else {
      ++failures;
      std::printf("FAIL  %zu. %s: %s%s\n", i + 1, guarantees[i].label,
                  check.failures.front().c_str(),
                  check.failures.size() > 1
                      ? (" (+" + std::to_string(check.failures.size() - 1) + " more)").c_str()
                      : "");
    }
  }
  std::printf("%s: %d of %zu guarantees hold (%.2fs total)\n", failures ? "FAIL" : "PASS",
              int(guarantees.size()) - failures, guarantees.size(), seconds_since(suite_start));
  return failures;
}
