#include "semrep/underspec.hpp"

#include <algorithm>

namespace semrep {

namespace {

void require_integrity(const SemRep& doc) {
  std::vector<Violation> violations = check_integrity(doc);
  if (!violations.empty())
    throw Error(Errc::integrity_error,
                "document has " + std::to_string(violations.size()) +
                    " integrity violation(s); first: " + violations.front().message);
}

std::uint64_t saturating_multiply(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kCountOverflow / b) return kCountOverflow;
  return a * b;
}

// Builds the ground reading for one choice of alternatives and bindings.
GroundRep materialize(const SemRep& doc, const std::vector<std::size_t>& group_choice,
                      const std::vector<std::size_t>& var_choice) {
  GroundRep reading;
  reading.rep = doc;
  reading.rep.alt_groups.clear();
  reading.rep.variables.clear();
  for (std::size_t gi = 0; gi < doc.alt_groups.size(); ++gi) {
    const AltGroup& group = doc.alt_groups[gi];
    const Alternative& alt = group.alternatives[group_choice[gi]];
    reading.score *= alt.cert;
    Node* owner = reading.rep.find_node(group.owner);
    owner->restrictions.insert(owner->restrictions.end(), alt.bundle.begin(), alt.bundle.end());
  }
  for (std::size_t vi = 0; vi < doc.variables.size(); ++vi) {
    const LabelVariable& var = doc.variables[vi];
    const std::string& node = var.domain[var_choice[vi]];
    for (auto& rel : reading.rep.relations) {
      if (rel.source == var.id) rel.source = node;
      if (rel.target == var.id) rel.target = node;
    }
  }
  return reading;
}

}  // namespace

std::uint64_t reading_count(const SemRep& doc) {
  require_integrity(doc);
  std::uint64_t count = 1;
  for (const auto& g : doc.alt_groups)
    count = saturating_multiply(count, g.alternatives.size());
  // Every domain member is a node, so every binding leaves all relation
  // endpoints resolvable; the admissibility filter never rejects here.
  for (const auto& v : doc.variables) count = saturating_multiply(count, v.domain.size());
  return count;
}

ReadingSet enumerate_readings(const SemRep& doc, std::size_t cap) {
  if (cap < 1) throw Error(Errc::invalid_argument, "reading cap must be at least 1");
  std::uint64_t total = reading_count(doc);  // checks integrity

  ReadingSet out;
  out.source_id = doc.id;
  out.exhaustive = total <= cap;

  const std::size_t groups = doc.alt_groups.size();
  const std::size_t vars = doc.variables.size();
  std::vector<std::size_t> group_choice(groups, 0);
  std::vector<std::size_t> var_choice(vars, 0);
  std::uint64_t produced = 0;

  while (produced < total && produced < cap) {
    out.readings.push_back(materialize(doc, group_choice, var_choice));
    ++produced;
    // Odometer step, last factor fastest: variables (reversed), then groups.
    bool carried = true;
    for (std::size_t i = vars; i-- > 0 && carried;) {
      if (++var_choice[i] < doc.variables[i].domain.size()) carried = false;
      else var_choice[i] = 0;
    }
    for (std::size_t i = groups; i-- > 0 && carried;) {
      if (++group_choice[i] < doc.alt_groups[i].alternatives.size()) carried = false;
      else group_choice[i] = 0;
    }
    if (carried) break;  // odometer wrapped: every combination visited
  }
  return out;
}

GroundRep best_reading(const SemRep& doc, std::size_t cap) {
  std::uint64_t total = reading_count(doc);
  if (total > cap)
    throw Error(Errc::cap_exceeded, "document has " +
                                        (total == kCountOverflow ? std::string("more than 2^64")
                                                                 : std::to_string(total)) +
                                        " readings, above the cap of " + std::to_string(cap));
  ReadingSet readings = enumerate_readings(doc, cap);
  std::size_t best = 0;
  for (std::size_t i = 1; i < readings.readings.size(); ++i)
    if (readings.readings[i].score > readings.readings[best].score) best = i;
  return std::move(readings.readings[best]);
}

SemRep prune(SemRep doc, std::string_view group_id, std::size_t keep) {
  AltGroup* group = doc.find_alt_group(group_id);
  if (!group) throw Error(Errc::unknown_id, "no alternative group '" + std::string(group_id) + "'");
  if (keep >= group->alternatives.size())
    throw Error(Errc::index_out_of_range,
                "alternative index " + std::to_string(keep) + " is out of range for a group of " +
                    std::to_string(group->alternatives.size()));
  Alternative kept = std::move(group->alternatives[keep]);
  group->alternatives.clear();
  group->alternatives.push_back(std::move(kept));
  return doc;
}

SemRep bind(SemRep doc, std::string_view variable_id, std::string_view node_id) {
  const LabelVariable* var = doc.find_variable(variable_id);
  if (!var) throw Error(Errc::unknown_id, "no variable '" + std::string(variable_id) + "'");
  if (!doc.find_node(node_id))
    throw Error(Errc::unknown_id, "no node '" + std::string(node_id) + "'");
  if (std::find(var->domain.begin(), var->domain.end(), node_id) == var->domain.end())
    throw Error(Errc::outside_domain, "node '" + std::string(node_id) +
                                          "' is not in the domain of '" +
                                          std::string(variable_id) + "'");
  for (auto& rel : doc.relations) {
    if (rel.source == variable_id) rel.source = std::string(node_id);
    if (rel.target == variable_id) rel.target = std::string(node_id);
  }
  std::erase_if(doc.variables,
                [&](const LabelVariable& v) { return v.id == variable_id; });
  return doc;
}

}  // namespace semrep
