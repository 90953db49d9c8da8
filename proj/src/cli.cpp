#include "semrep/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string_view>

#include <CLI11.hpp>

#include "semrep/fusion.hpp"
#include "semrep/model.hpp"
#include "semrep/registry.hpp"
#include "semrep/underspec.hpp"
#include "semrep/xml.hpp"

namespace semrep::cli {

namespace {

namespace fs = std::filesystem;

// Input errors distinct from library errors: unreadable files, bad --corr
// syntax, and the like. Always exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Context {
  Context(std::istream& i, std::ostream& o, std::ostream& e) : in(i), out(o), err(e) {}

  std::istream& in;
  std::ostream& out;
  std::ostream& err;

  // shared flag storage; each subcommand binds the options it supports
  std::string registry_path;
  std::string profile_path;
  std::string corr_file;
  std::string session_dir;
  std::vector<std::string> corr_args;
  bool strict = false;
  std::size_t cap = kDefaultReadingCap;
};

std::string slurp(Context& ctx, const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << ctx.in.rdbuf();
    return ss.str();
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

FormatProfile profile_for(Context& ctx) {
  if (ctx.profile_path.empty()) return {};
  return load_profile(slurp(ctx, ctx.profile_path));
}

Registry registry_for(Context& ctx) {
  if (ctx.registry_path.empty()) return {};
  return load_registry(slurp(ctx, ctx.registry_path));
}

void print_diagnostics(Context& ctx, const std::string& path,
                       const std::vector<xmldom::Diagnostic>& diags) {
  for (const auto& d : diags) {
    ctx.err << path << ":" << d.line << ":" << d.col << ": "
            << (d.fatal ? "error" : "warning") << ": " << d.message << "\n";
  }
}

SemRep parse_doc(Context& ctx, const std::string& path, const FormatProfile& profile) {
  ParseResult pr = parse(slurp(ctx, path), profile);
  print_diagnostics(ctx, path, pr.diagnostics);
  if (!pr.ok()) throw InputError("cannot parse document: " + path);
  return std::move(*pr.doc);
}

Correspondence correspondence_for(Context& ctx) {
  Correspondence c;
  for (const auto& spec : ctx.corr_args) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw InputError("bad --corr (want leftId=rightId): " + spec);
    c.pairs.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
  }
  if (!ctx.corr_file.empty()) {
    std::istringstream lines(slurp(ctx, ctx.corr_file));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      std::istringstream words(line);
      std::string l, r, extra;
      if (!(words >> l)) continue;  // blank line
      if (!(words >> r) || (words >> extra))
        throw InputError(ctx.corr_file + ":" + std::to_string(lineno) +
                         ": want exactly two identifiers per line");
      c.pairs.emplace_back(l, r);
    }
  }
  return c;
}

// The factor radices of a document's reading space, in enumeration order
// (groups then variables, document order). Decoding a reading's index against
// them recovers which choices produced it.
struct Factor {
  bool is_group = false;
  std::size_t position = 0;
  std::size_t size = 0;
};

std::vector<Factor> reading_factors(const SemRep& doc) {
  std::vector<Factor> fs;
  for (std::size_t i = 0; i < doc.alt_groups.size(); ++i)
    fs.push_back({true, i, doc.alt_groups[i].alternatives.size()});
  for (std::size_t i = 0; i < doc.variables.size(); ++i)
    fs.push_back({false, i, doc.variables[i].domain.size()});
  return fs;
}

// "Order" for a chosen bundle {dialAct=Order}; "v=x" for a variable binding;
// factors joined by spaces, "-" when the document is already ground.
std::string reading_descriptor(const SemRep& doc, const std::vector<Factor>& fs,
                               std::uint64_t index) {
  if (fs.empty()) return "-";
  std::vector<std::size_t> choice(fs.size());
  for (std::size_t k = fs.size(); k-- > 0;) {
    choice[k] = static_cast<std::size_t>(index % fs[k].size);
    index /= fs[k].size;
  }
  std::string out;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    if (!out.empty()) out += " ";
    if (fs[k].is_group) {
      const auto& bundle = doc.alt_groups[fs[k].position].alternatives[choice[k]].bundle;
      std::string values;
      for (const auto& r : bundle) values += (values.empty() ? "" : ",") + r.value.lexical;
      out += values.empty() ? "-" : values;
    } else {
      const auto& v = doc.variables[fs[k].position];
      out += v.id + "=" + v.domain[choice[k]];
    }
  }
  return out;
}

// ---- subcommands ------------------------------------------------------------

int cmd_validate(Context& ctx, const std::string& file) {
  SemRep doc = parse_doc(ctx, file, profile_for(ctx));
  ValidationReport report = validate(doc, registry_for(ctx), ctx.strict);
  for (const auto& f : report.findings) {
    ctx.out << (f.severity == Severity::error ? "error" : "warning") << ": " << f.location << ": "
            << f.message << " [" << f.rule << "]\n";
  }
  ctx.out << (report.level == ValidationLevel::valid ? "valid: " : "well-formed only: ")
          << report.error_count() << " errors, " << report.warning_count() << " warnings\n";
  return report.error_count() ? 1 : 0;
}

int cmd_canon(Context& ctx, const std::string& file) {
  FormatProfile profile = profile_for(ctx);
  ctx.out << serialize(parse_doc(ctx, file, profile), profile);
  return 0;
}

int cmd_readings(Context& ctx, const std::string& file) {
  SemRep doc = parse_doc(ctx, file, profile_for(ctx));
  ReadingSet rs = enumerate_readings(doc, ctx.cap);
  auto fs = reading_factors(doc);
  for (std::size_t i = 0; i < rs.readings.size(); ++i)
    ctx.out << format_number(rs.readings[i].score) << " " << reading_descriptor(doc, fs, i)
            << "\n";
  if (!rs.exhaustive) ctx.err << "warning: reading cap reached; listing is truncated\n";
  return 0;
}

int cmd_best(Context& ctx, const std::string& file) {
  SemRep doc = parse_doc(ctx, file, profile_for(ctx));
  ReadingSet rs = enumerate_readings(doc, ctx.cap);
  if (!rs.exhaustive)
    throw Error(Errc::cap_exceeded, "document has more than " + std::to_string(ctx.cap) +
                                        " readings; raise --cap or prune first");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rs.readings.size(); ++i)
    if (rs.readings[i].score > rs.readings[best].score) best = i;
  ctx.out << format_number(rs.readings[best].score) << " "
          << reading_descriptor(doc, reading_factors(doc), best) << "\n";
  return 0;
}

int cmd_prune(Context& ctx, const std::string& file, const std::string& group, std::size_t keep) {
  FormatProfile profile = profile_for(ctx);
  ctx.out << serialize(prune(parse_doc(ctx, file, profile), group, keep), profile);
  return 0;
}

int cmd_bind(Context& ctx, const std::string& file, const std::string& variable,
             const std::string& node) {
  FormatProfile profile = profile_for(ctx);
  ctx.out << serialize(semrep::bind(parse_doc(ctx, file, profile), variable, node), profile);
  return 0;
}

int report_merge(Context& ctx, const MergeResult& r, const FormatProfile& profile) {
  for (const auto& w : r.warnings) ctx.err << "warning: " << w << "\n";
  if (!r.ok()) {
    for (const auto& c : r.conflicts.conflicts) ctx.out << c.str() << "\n";
    return 1;
  }
  ctx.out << serialize(*r.doc, profile);
  return 0;
}

int cmd_merge(Context& ctx, const std::string& left, const std::string& right) {
  FormatProfile profile = profile_for(ctx);
  SemRep a = parse_doc(ctx, left, profile);
  SemRep b = parse_doc(ctx, right, profile);
  MergeResult r = merge(a, b, correspondence_for(ctx), registry_for(ctx));
  return report_merge(ctx, r, profile);
}

int cmd_assimilate(Context& ctx, const std::string& file) {
  FormatProfile profile = profile_for(ctx);
  fs::path dir(ctx.session_dir);
  fs::create_directories(dir);
  const fs::path current_path = dir / "current.xml";
  const fs::path history_path = dir / "history.log";

  FusionSession session;
  if (fs::exists(current_path)) {
    session.current = parse_doc(ctx, current_path.string(), profile);
  } else {
    session.current.id = "session";
  }
  if (fs::exists(history_path)) {
    // Only successful assimilations advance the step counter.
    std::istringstream lines(slurp(ctx, history_path.string()));
    std::string line;
    while (std::getline(lines, line)) {
      std::istringstream words(line);
      std::string docid, stamp, outcome;
      if ((words >> docid >> stamp >> outcome) && outcome == "ok")
        session.history.push_back({docid, 0});
    }
  }

  SemRep d = parse_doc(ctx, file, profile);
  MergeResult r = assimilate(session, d, correspondence_for(ctx), registry_for(ctx));

  const std::int64_t stamp =
      r.ok() ? session.history.back().timestamp : assimilation_timestamp(d);
  std::ofstream history(history_path, std::ios::binary | std::ios::app);
  if (!history) throw InputError("cannot write " + history_path.string());
  history << (d.id.empty() ? "-" : d.id) << " " << stamp << " " << (r.ok() ? "ok" : "conflict")
          << "\n";

  if (r.ok()) {
    std::ofstream current(current_path, std::ios::binary | std::ios::trunc);
    if (!current) throw InputError("cannot write " + current_path.string());
    current << serialize(session.current, profile);
  }
  return report_merge(ctx, r, profile);
}

int cmd_map(Context& ctx, const std::string& file, const std::string& mapping_path) {
  FormatProfile profile = profile_for(ctx);
  SemRep doc = parse_doc(ctx, file, profile);
  CategoryMapping mapping = load_mapping(slurp(ctx, mapping_path));
  ctx.out << serialize(map_categories(std::move(doc), mapping), profile);
  return 0;
}

int cmd_regdiff(Context& ctx, const std::string& left, const std::string& right) {
  Registry a = load_registry(slurp(ctx, left));
  Registry b = load_registry(slurp(ctx, right));
  RegistryDiff d = registry_diff(a, b);
  for (const auto& n : d.only_in_a) ctx.out << "only in a: " << n << "\n";
  for (const auto& n : d.only_in_b) ctx.out << "only in b: " << n << "\n";
  for (const auto& [name, fields] : d.changed) {
    std::string list;
    for (const auto& f : fields) list += (list.empty() ? "" : ", ") + f;
    ctx.out << "changed: " << name << " (" << list << ")\n";
  }
  return 0;
}

int cmd_stats(Context& ctx, const std::string& file) {
  SemRep doc = parse_doc(ctx, file, profile_for(ctx));
  std::size_t events = 0, participants = 0, alternatives = 0;
  for (const auto& n : doc.nodes) (n.kind == NodeKind::event ? events : participants)++;
  for (const auto& g : doc.alt_groups) alternatives += g.alternatives.size();
  const std::uint64_t count = reading_count(doc);
  ctx.out << "nodes: " << doc.nodes.size() << "\n"
          << "events: " << events << "\n"
          << "participants: " << participants << "\n"
          << "relations: " << doc.relations.size() << "\n"
          << "alt-groups: " << doc.alt_groups.size() << "\n"
          << "alternatives: " << alternatives << "\n"
          << "variables: " << doc.variables.size() << "\n"
          << "readings: ";
  if (count == kCountOverflow)
    ctx.out << "overflow\n";
  else
    ctx.out << count << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  Context ctx{in, out, err};

  CLI::App app{"multimodal meaning representation toolkit"};
  app.name("semrep");
  app.require_subcommand(1);

  auto with_profile = [&](CLI::App* sub) {
    sub->add_option("--profile", ctx.profile_path, "format profile file (element/attribute names)");
    return sub;
  };
  auto with_registry = [&](CLI::App* sub) {
    sub->add_option("--registry", ctx.registry_path, "data category registry file");
    return sub;
  };
  auto with_corr = [&](CLI::App* sub) {
    sub->add_option("--corr", ctx.corr_args, "co-reference pair leftId=rightId (repeatable)")
        ->type_size(1);
    sub->add_option("--corr-file", ctx.corr_file,
                    "file of co-reference pairs, two identifiers per line");
    return sub;
  };
  auto with_cap = [&](CLI::App* sub) {
    sub->add_option("--cap", ctx.cap, "reading enumeration cap")->check(CLI::PositiveNumber);
    return sub;
  };

  std::string file, second, third;
  std::size_t keep_index = 0;

  auto* validate_cmd =
      with_registry(with_profile(app.add_subcommand("validate", "check a document against a registry")));
  validate_cmd->add_flag("--strict", ctx.strict, "unknown categories are errors, not warnings");
  validate_cmd->add_option("file", file, "document (- for stdin)")->required();

  auto* canon_cmd = with_profile(app.add_subcommand("canon", "print the canonical serialization"));
  canon_cmd->add_option("file", file, "document (- for stdin)")->required();

  auto* readings_cmd =
      with_cap(with_profile(app.add_subcommand("readings", "enumerate readings with scores")));
  readings_cmd->add_option("file", file, "document (- for stdin)")->required();

  auto* best_cmd =
      with_cap(with_profile(app.add_subcommand("best", "print the highest-scoring reading")));
  best_cmd->add_option("file", file, "document (- for stdin)")->required();

  auto* prune_cmd =
      with_profile(app.add_subcommand("prune", "narrow an alternative group to one alternative"));
  prune_cmd->add_option("file", file, "document (- for stdin)")->required();
  prune_cmd->add_option("group", second, "alternative group identifier")->required();
  prune_cmd->add_option("index", keep_index, "0-based index of the alternative to keep")
      ->required();

  auto* bind_cmd = with_profile(app.add_subcommand("bind", "instantiate a label variable"));
  bind_cmd->add_option("file", file, "document (- for stdin)")->required();
  bind_cmd->add_option("variable", second, "variable identifier")->required();
  bind_cmd->add_option("node", third, "node identifier from the variable's domain")->required();

  auto* merge_cmd = with_corr(with_registry(
      with_profile(app.add_subcommand("merge", "fuse two documents into one"))));
  merge_cmd->add_option("left", file, "left document")->required();
  merge_cmd->add_option("right", second, "right document")->required();

  auto* assim_cmd = with_corr(with_registry(
      with_profile(app.add_subcommand("assimilate", "fold a document into a session"))));
  assim_cmd->add_option("--session", ctx.session_dir, "session directory (current.xml, history.log)")
      ->required();
  assim_cmd->add_option("file", file, "document to assimilate")->required();

  auto* map_cmd =
      with_profile(app.add_subcommand("map", "rename categories through a mapping file"));
  map_cmd->add_option("file", file, "document (- for stdin)")->required();
  map_cmd->add_option("mapping", second, "category mapping file")->required();

  auto* regdiff_cmd = app.add_subcommand("regdiff", "compare two registries");
  regdiff_cmd->add_option("a", file, "left registry")->required();
  regdiff_cmd->add_option("b", second, "right registry")->required();

  auto* stats_cmd = with_profile(app.add_subcommand("stats", "print document size counters"));
  stats_cmd->add_option("file", file, "document (- for stdin)")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // --help and --version are successes; everything else is a usage error.
    app.exit(e, out, err);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(ctx, file);
    if (canon_cmd->parsed()) return cmd_canon(ctx, file);
    if (readings_cmd->parsed()) return cmd_readings(ctx, file);
    if (best_cmd->parsed()) return cmd_best(ctx, file);
    if (prune_cmd->parsed()) return cmd_prune(ctx, file, second, keep_index);
    if (bind_cmd->parsed()) return cmd_bind(ctx, file, second, third);
    if (merge_cmd->parsed()) return cmd_merge(ctx, file, second);
    if (assim_cmd->parsed()) return cmd_assimilate(ctx, file);
    if (map_cmd->parsed()) return cmd_map(ctx, file, second);
    if (regdiff_cmd->parsed()) return cmd_regdiff(ctx, file, second);
    if (stats_cmd->parsed()) return cmd_stats(ctx, file);
    err << "error: no subcommand\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << errc_name(e.code) << ": " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace semrep::cli
