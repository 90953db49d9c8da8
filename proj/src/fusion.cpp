#include "semrep/fusion.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace semrep {

namespace {

std::string value_text(const Value& v) { return v.lexical; }

bool restriction_before(const Restriction& a, const Restriction& b) {
  if (a.category != b.category) return a.category < b.category;
  return a.value < b.value;
}

std::vector<Restriction> sorted_bundle(std::vector<Restriction> b) {
  std::sort(b.begin(), b.end(), restriction_before);
  return b;
}

std::string render_restrictions(const std::vector<Restriction>& rs) {
  std::string out;
  for (const auto& r : rs) {
    if (!out.empty()) out += " ";
    out += r.category + "=" + r.value.lexical;
  }
  return out.empty() ? "-" : out;
}

std::string render_group(const AltGroup& g) {
  std::string out = "{";
  for (std::size_t i = 0; i < g.alternatives.size(); ++i) {
    if (i) out += "; ";
    out += render_restrictions(g.alternatives[i].bundle);
    out += " @" + format_number(g.alternatives[i].cert);
  }
  return out + "}";
}

std::string render_extent(const TemporalExtent& e) {
  return format_number(e.start) + ".." + format_number(e.end);
}

// ---- reference redirection and renaming ------------------------------------

void redirect_values(std::vector<Restriction>& rs, const std::string& from, const std::string& to) {
  for (auto& r : rs)
    if (r.value.type == ValueType::reference && r.value.lexical == from)
      r.value.lexical = to;
}

// Rewrites every use of identifiers named in `map` (endpoints, owners, domain
// members, reference values, and the declarations themselves).
void rename_ids(SemRep& doc, const std::unordered_map<std::string, std::string>& map) {
  auto rn = [&](std::string& id) {
    auto it = map.find(id);
    if (it != map.end()) id = it->second;
  };
  auto rn_values = [&](std::vector<Restriction>& rs) {
    for (auto& r : rs)
      if (r.value.type == ValueType::reference) rn(r.value.lexical);
  };
  for (auto& n : doc.nodes) {
    rn(n.id);
    rn_values(n.restrictions);
  }
  for (auto& r : doc.relations) {
    rn(r.id);
    rn(r.source);
    rn(r.target);
    rn_values(r.restrictions);
  }
  for (auto& g : doc.alt_groups) {
    rn(g.id);
    rn(g.owner);
    for (auto& alt : g.alternatives) rn_values(alt.bundle);
  }
  for (auto& v : doc.variables) {
    rn(v.id);
    for (auto& d : v.domain) rn(d);
  }
}

// ---- metadata merging -------------------------------------------------------

void warn_field(std::vector<std::string>* warnings, const std::string& where,
                const std::string& field, const std::string& left, const std::string& right) {
  if (!warnings) return;
  warnings->push_back("metadata disagreement on " + where + " " + field + ": kept \"" + left +
                      "\", dropped \"" + right + "\"");
}

void merge_string_field(std::optional<std::string>& left, const std::optional<std::string>& right,
                        std::vector<std::string>* warnings, const std::string& where,
                        const std::string& field) {
  if (!left) {
    left = right;
  } else if (right && *right != *left) {
    warn_field(warnings, where, field, *left, *right);
  }
}

void merge_meta(MetaBlock& left, const MetaBlock& right, const std::string& where,
                std::vector<std::string>* warnings) {
  if (right.environment) {
    if (!left.environment) {
      left.environment = right.environment;
    } else {
      auto& l = *left.environment;
      const auto& r = *right.environment;
      if (!l.timestamp) {
        l.timestamp = r.timestamp;
      } else if (r.timestamp && *r.timestamp != *l.timestamp) {
        warn_field(warnings, where, "time", format_number(double(*l.timestamp)),
                   format_number(double(*r.timestamp)));
      }
      merge_string_field(l.spatial, r.spatial, warnings, where, "spatial");
    }
  }
  if (right.processing) {
    if (!left.processing) {
      left.processing = right.processing;
    } else {
      auto& l = *left.processing;
      const auto& r = *right.processing;
      merge_string_field(l.producer, r.producer, warnings, where, "producer");
      if (!l.confidence) {
        l.confidence = r.confidence;
      } else if (r.confidence && *r.confidence != *l.confidence) {
        warn_field(warnings, where, "confidence", format_number(*l.confidence),
                   format_number(*r.confidence));
      }
    }
  }
  if (right.interactional) {
    if (!left.interactional) {
      left.interactional = right.interactional;
    } else {
      auto& l = *left.interactional;
      const auto& r = *right.interactional;
      merge_string_field(l.speaker, r.speaker, warnings, where, "speaker");
      if (l.addressees.empty()) {
        l.addressees = r.addressees;
      } else if (!r.addressees.empty() && r.addressees != l.addressees) {
        std::string ls, rs;
        for (const auto& a : l.addressees) ls += (ls.empty() ? "" : " ") + a;
        for (const auto& a : r.addressees) rs += (rs.empty() ? "" : " ") + a;
        warn_field(warnings, where, "addressees", ls, rs);
      }
    }
  }
}

template <typename T>
void append_unseen(std::vector<T>& left, const std::vector<T>& right) {
  for (const auto& item : right)
    if (std::find(left.begin(), left.end(), item) == left.end()) left.push_back(item);
}

// The unified attachment lists are sets in first-occurrence order; repeats
// already present on the kept node would otherwise survive in one merge
// direction and collapse in the other.
template <typename T>
void dedup_in_place(std::vector<T>& items) {
  std::vector<T> seen;
  seen.reserve(items.size());
  for (auto& item : items)
    if (std::find(seen.begin(), seen.end(), item) == seen.end()) seen.push_back(std::move(item));
  items = std::move(seen);
}

}  // namespace

std::string Conflict::str() const {
  return "conflict: owner=" + owner + " category=" + category + " left=" + left +
         " right=" + right + " rule=" + rule;
}

MergeResult unify_nodes(SemRep doc, const std::string& a, const std::string& b,
                        const Registry& reg) {
  if (a == b) throw Error(Errc::invalid_argument, "cannot unify a node with itself: " + a);
  Node* na = doc.find_node(a);
  Node* nb = doc.find_node(b);
  if (!na) throw Error(Errc::unknown_id, "unknown node: " + a);
  if (!nb) throw Error(Errc::unknown_id, "unknown node: " + b);
  if (na->kind != nb->kind)
    throw Error(Errc::kind_mismatch, "cannot unify " + std::string(kind_name(na->kind)) + " " + a +
                                         " with " + std::string(kind_name(nb->kind)) + " " + b);

  MergeResult result;

  // Conflict pass: registry-declared single-valued categories whose ground
  // values differ across the two nodes, and contradictory temporal extents.
  std::unordered_map<std::string, std::set<std::string>> va, vb;
  for (const auto& r : na->restrictions) va[r.category].insert(value_text(r.value));
  for (const auto& r : nb->restrictions) vb[r.category].insert(value_text(r.value));
  std::set<std::string> flagged;
  for (const auto& [cat, left_vals] : va) {
    auto it = vb.find(cat);
    if (it == vb.end()) continue;
    const CategorySpec* spec = reg.find(cat);
    if (!spec || spec->arity != Arity::single) continue;
    if (left_vals != it->second && flagged.insert(cat).second) {
      std::string ls, rs;
      for (const auto& v : left_vals) ls += (ls.empty() ? "" : "|") + v;
      for (const auto& v : it->second) rs += (rs.empty() ? "" : "|") + v;
      result.conflicts.conflicts.push_back({a, cat, ls, rs, "single-value"});
    }
  }
  if (na->extent && nb->extent && !(*na->extent == *nb->extent))
    result.conflicts.conflicts.push_back(
        {a, "extent", render_extent(*na->extent), render_extent(*nb->extent), "extent"});
  if (!result.conflicts.empty()) return result;

  // Apply: fold b's information into a, then delete b.
  dedup_in_place(na->restrictions);
  append_unseen(na->restrictions, nb->restrictions);
  if (!na->extent) na->extent = nb->extent;
  dedup_in_place(na->links);
  append_unseen(na->links, nb->links);
  merge_meta(na->meta, nb->meta, "node " + a, &result.warnings);
  dedup_in_place(na->extensions);
  append_unseen(na->extensions, nb->extensions);

  for (auto& rel : doc.relations) {
    if (rel.source == b) rel.source = a;
    if (rel.target == b) rel.target = a;
    redirect_values(rel.restrictions, b, a);
  }
  for (auto& n : doc.nodes) redirect_values(n.restrictions, b, a);
  for (auto& g : doc.alt_groups) {
    if (g.owner == b) g.owner = a;
    for (auto& alt : g.alternatives) redirect_values(alt.bundle, b, a);
  }
  for (auto& v : doc.variables) {
    std::vector<std::string> domain;
    for (auto& d : v.domain) {
      const std::string& mapped = (d == b) ? a : d;
      if (std::find(domain.begin(), domain.end(), mapped) == domain.end())
        domain.push_back(mapped);
    }
    v.domain = std::move(domain);
  }
  std::erase_if(doc.nodes, [&](const Node& n) { return n.id == b; });

  result.doc = std::move(doc);
  return result;
}

MergeResult merge(const SemRep& a, const SemRep& b, const Correspondence& c, const Registry& reg,
                  std::size_t step) {
  {
    auto va = check_integrity(a);
    if (!va.empty())
      throw Error(Errc::integrity_error, "left document: " + va.front().message);
    auto vb = check_integrity(b);
    if (!vb.empty())
      throw Error(Errc::integrity_error, "right document: " + vb.front().message);
  }

  // Correspondence sanity: both ends must name nodes, injectively.
  std::unordered_set<std::string> seen_left, seen_right;
  for (const auto& [l, r] : c.pairs) {
    if (!a.find_node(l)) throw Error(Errc::unknown_id, "correspondence names no node in left: " + l);
    if (!b.find_node(r))
      throw Error(Errc::unknown_id, "correspondence names no node in right: " + r);
    if (!seen_left.insert(l).second)
      throw Error(Errc::invalid_argument, "correspondence repeats left node: " + l);
    if (!seen_right.insert(r).second)
      throw Error(Errc::invalid_argument, "correspondence repeats right node: " + r);
  }

  // Rename colliding right-hand identifiers before taking the union.
  std::unordered_set<std::string> used;
  auto collect = [&used](const SemRep& d) {
    for (const auto& n : d.nodes) used.insert(n.id);
    for (const auto& r : d.relations) used.insert(r.id);
    for (const auto& g : d.alt_groups) used.insert(g.id);
    for (const auto& v : d.variables) used.insert(v.id);
  };
  collect(a);
  std::unordered_set<std::string> left_ids = used;
  collect(b);
  const std::string suffix = "_m" + std::to_string(step);
  std::unordered_map<std::string, std::string> rename;
  auto claim = [&](const std::string& id) {
    if (!left_ids.count(id)) return;
    std::string fresh = id + suffix;
    while (used.count(fresh)) fresh += suffix;
    used.insert(fresh);
    rename.emplace(id, fresh);
  };
  for (const auto& n : b.nodes) claim(n.id);
  for (const auto& r : b.relations) claim(r.id);
  for (const auto& g : b.alt_groups) claim(g.id);
  for (const auto& v : b.variables) claim(v.id);

  SemRep right = b;
  if (!rename.empty()) rename_ids(right, rename);

  // Disjoint union. The left document wins the id and metadata defaults.
  MergeResult result;
  SemRep merged = a;
  merged.nodes.insert(merged.nodes.end(), right.nodes.begin(), right.nodes.end());
  merged.relations.insert(merged.relations.end(), right.relations.begin(), right.relations.end());
  merged.alt_groups.insert(merged.alt_groups.end(), right.alt_groups.begin(),
                           right.alt_groups.end());
  merged.variables.insert(merged.variables.end(), right.variables.begin(), right.variables.end());
  merge_meta(merged.meta, right.meta, "document", &result.warnings);
  merged.extensions.insert(merged.extensions.end(), right.extensions.begin(),
                           right.extensions.end());

  std::unordered_set<std::string> left_group_ids;
  for (const auto& g : a.alt_groups) left_group_ids.insert(g.id);

  // Unify corresponded pairs; the first conflict aborts the whole merge.
  std::vector<std::string> unified;
  for (const auto& [l, r_orig] : c.pairs) {
    auto it = rename.find(r_orig);
    const std::string r = it == rename.end() ? r_orig : it->second;
    MergeResult u = unify_nodes(std::move(merged), l, r, reg);
    result.warnings.insert(result.warnings.end(), u.warnings.begin(), u.warnings.end());
    if (!u.ok()) {
      result.conflicts = std::move(u.conflicts);
      return result;
    }
    merged = std::move(*u.doc);
    unified.push_back(l);
  }

  // Alternative reconciliation: on each unified node, pair up one left group
  // and one right group ranging over the same categories, and intersect them.
  for (const auto& owner : unified) {
    struct Bucket {
      std::vector<std::size_t> left, right;
    };
    std::map<std::set<std::string>, Bucket> buckets;
    for (std::size_t i = 0; i < merged.alt_groups.size(); ++i) {
      const AltGroup& g = merged.alt_groups[i];
      if (g.owner != owner) continue;
      std::set<std::string> cats;
      for (const auto& alt : g.alternatives)
        for (const auto& r : alt.bundle) cats.insert(r.category);
      if (left_group_ids.count(g.id))
        buckets[cats].left.push_back(i);
      else
        buckets[cats].right.push_back(i);
    }
    std::vector<std::size_t> drop;
    for (auto& [cats, bucket] : buckets) {
      const std::size_t n = std::min(bucket.left.size(), bucket.right.size());
      for (std::size_t k = 0; k < n; ++k) {
        AltGroup& gl = merged.alt_groups[bucket.left[k]];
        AltGroup& gr = merged.alt_groups[bucket.right[k]];
        std::vector<Alternative> kept;
        std::vector<bool> taken(gr.alternatives.size(), false);
        for (const auto& la : gl.alternatives) {
          auto key = sorted_bundle(la.bundle);
          for (std::size_t j = 0; j < gr.alternatives.size(); ++j) {
            if (taken[j]) continue;
            if (sorted_bundle(gr.alternatives[j].bundle) == key) {
              taken[j] = true;
              kept.push_back({la.bundle, la.cert * gr.alternatives[j].cert});
              break;
            }
          }
        }
        if (kept.empty()) {
          std::string catlist;
          for (const auto& cname : cats) catlist += (catlist.empty() ? "" : ",") + cname;
          result.conflicts.conflicts.push_back(
              {owner, catlist, render_group(gl), render_group(gr), "alt-intersection"});
          return result;
        }
        gl.alternatives = std::move(kept);
        drop.push_back(bucket.right[k]);
      }
    }
    std::sort(drop.begin(), drop.end(), std::greater<>());
    for (std::size_t idx : drop) merged.alt_groups.erase(merged.alt_groups.begin() + idx);
  }

  assert(check_integrity(merged).empty());
  result.doc = std::move(merged);
  return result;
}

std::int64_t assimilation_timestamp(const SemRep& d, std::optional<std::int64_t> now) {
  if (d.meta.environment && d.meta.environment->timestamp)
    return *d.meta.environment->timestamp;
  if (now) return *now;
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

MergeResult assimilate(FusionSession& s, const SemRep& d, const Correspondence& c,
                       const Registry& reg, std::optional<std::int64_t> now) {
  const std::size_t step = s.history.size() + 1;
  MergeResult r = merge(s.current, d, c, reg, step);
  if (!r.ok()) return r;

  s.current = *r.doc;
  s.history.push_back({d.id, assimilation_timestamp(d, now)});
  return r;
}

}  // namespace semrep
