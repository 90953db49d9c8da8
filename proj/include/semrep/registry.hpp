// Data category registry and the validity tier it defines on top of
// structural integrity, plus category mapping between vocabularies and
// registry comparison.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semrep/model.hpp"

namespace semrep {

// Where a data category may appear.
enum class Applicability { event, participant, relation, alternative };

enum class Arity { single, multiple };

enum class ValueSpace { closed, open_text, number, reference };

struct CategorySpec {
  std::string name;
  std::string definition;
  std::vector<Applicability> applies_to;  // sorted, duplicate-free
  Arity arity = Arity::multiple;
  ValueSpace space = ValueSpace::open_text;
  std::vector<std::string> closed_values;  // non-empty for closed categories
  bool contextual = false;  // administrative data, excluded from denotation

  bool applies(Applicability a) const;
  friend bool operator==(const CategorySpec&, const CategorySpec&) = default;
};

struct Registry {
  std::string id;
  std::vector<CategorySpec> categories;

  const CategorySpec* find(std::string_view name) const;
};

// Registry file: root <registry id="…"> holding <category name="…"
// appliesTo="event,participant,…" arity="single|multiple"
// type="closed|text|number|reference" contextual="true|false"> elements;
// closed categories list <value> children; an optional <definition> child
// holds free text. Throws Errc::parse_error / Errc::duplicate_category.
Registry load_registry(std::string_view text);

enum class Severity { error, warning };

struct Finding {
  Severity severity = Severity::error;
  std::string location;  // offending identifier
  std::string rule;      // short rule token, e.g. "value-space"
  std::string message;
};

enum class ValidationLevel { well_formed_only, valid };

struct ValidationReport {
  ValidationLevel level = ValidationLevel::valid;
  std::vector<Finding> findings;

  std::size_t error_count() const;
  std::size_t warning_count() const;
};

// Two-tier validation: structural integrity first (violations echo as errors
// at level well_formed_only), then registry validity — category known (a
// warning by default, an error when `strict`), applicability, arity of
// single-valued categories (one alternative bundle plus its owner's ground
// restrictions; alternatives never conflict with each other), and value
// spaces. Findings are data; nothing throws.
ValidationReport validate(const SemRep& doc, const Registry& reg, bool strict = false);

struct MappingPair {
  std::string from_name;
  std::string to_name;
  std::vector<std::pair<std::string, std::string>> value_map;
};

struct CategoryMapping {
  std::vector<MappingPair> pairs;
};

// Mapping file: root <mapping> holding <map from="…" to="…"> elements, each
// with optional <value from="…" to="…"/> children.
CategoryMapping load_mapping(std::string_view text);

// Renames restriction categories (and values, where a value_map entry
// matches) throughout the document. Structure is untouched. Throws
// Errc::ambiguous_mapping when two pairs share a from_name.
SemRep map_categories(SemRep doc, const CategoryMapping& m);

struct RegistryDiff {
  std::vector<std::string> only_in_a;
  std::vector<std::string> only_in_b;
  // category name -> fields that differ (applies_to, arity, value_space,
  // values, contextual, definition)
  std::vector<std::pair<std::string, std::vector<std::string>>> changed;

  bool empty() const { return only_in_a.empty() && only_in_b.empty() && changed.empty(); }
};

RegistryDiff registry_diff(const Registry& a, const Registry& b);

std::string applicability_name(Applicability a);
std::string arity_name(Arity a);
std::string value_space_name(ValueSpace s);

}  // namespace semrep
