// wearcache: per-set FIFO cache profiling for wear-out design space exploration.
//
// Exit status: 0 success, 1 usage error, 2 data or validation failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wearcache/wearcache.hpp"

namespace {

using namespace wearcache;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::string trace;
  std::string format{"text"};
  std::uint32_t sets{0};
  std::uint32_t line_size{0};
  std::uint32_t assoc{0};
  PredictorConfig predictor;
  std::string predictor_mode{"interp"};
  std::string profile;
  std::string out;
  std::string out_format{"json"};
  std::string config;
  std::string budget;
};

void add_trace_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--trace", o.trace, "Memory access trace");
  cmd->add_option("--format", o.format, "Trace format")->check(CLI::IsMember({"text", "binary"}));
  cmd->add_option("--sets", o.sets, "Number of cache sets (power of two)");
  cmd->add_option("--line-size", o.line_size, "Bytes per line (power of two)");
  cmd->add_option("--assoc", o.assoc, "As-built associativity");
}

void add_predictor_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--h-tol", o.predictor.h_tol, "Relative h tolerance between anchors");
  cmd->add_option("--n-tol", o.predictor.n_tol, "Miss gap that triggers bisection");
  cmd->add_option("--max-skip", o.predictor.max_skip, "Max unsimulated associativities in a row");
  cmd->add_option("--predictor", o.predictor_mode, "Gap filling")
      ->check(CLI::IsMember({"interp", "bme"}));
}

CacheGeometry geometry_of(const RunOptions& o) {
  if (o.sets == 0 || o.line_size == 0 || o.assoc == 0)
    throw UsageError("--sets, --line-size and --assoc are required with --trace");
  CacheGeometry g{o.sets, o.line_size, o.assoc};
  try {
    g.check();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return g;
}

PredictorConfig predictor_of(const RunOptions& o) {
  PredictorConfig cfg = o.predictor;
  cfg.mode = o.predictor_mode == "bme" ? CurveMode::Bme : CurveMode::Interp;
  try {
    cfg.check();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::vector<TraceAccess> load_trace(const RunOptions& o) {
  if (o.trace.empty()) throw UsageError("--trace is required");
  const bool binary = o.format == "binary";
  std::ifstream in(o.trace, binary ? std::ios::binary : std::ios::in);
  if (!in) throw DataError("cannot open trace '" + o.trace + "'");
  try {
    return parse_trace(in, binary ? TraceFormat::Binary : TraceFormat::Text);
  } catch (const TraceError& e) {
    throw DataError(o.trace + ": " + e.what());
  }
}

CacheProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open profile '" + path + "'");
  try {
    return read_profile_json(in);
  } catch (const std::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

// A profile from --profile, or one built from --trace and the geometry flags.
CacheProfile profile_of(const RunOptions& o, std::vector<TraceAccess>* trace_out = nullptr) {
  if (!o.profile.empty()) {
    if (trace_out && !o.trace.empty()) *trace_out = load_trace(o);
    return load_profile(o.profile);
  }
  if (o.trace.empty()) throw UsageError("need --profile or --trace");
  const CacheGeometry g = geometry_of(o);
  const PredictorConfig cfg = predictor_of(o);
  auto trace = load_trace(o);
  auto prof = profile_cache(trace, g, cfg);
  if (trace_out) *trace_out = std::move(trace);
  return prof;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

int cmd_profile(const RunOptions& o) {
  if (o.out.empty()) throw UsageError("--out is required");
  const CacheGeometry g = geometry_of(o);
  const PredictorConfig cfg = predictor_of(o);
  auto trace = load_trace(o);

  const auto t0 = std::chrono::steady_clock::now();
  const CacheProfile prof = profile_cache(trace, g, cfg);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;

  auto out = open_out(o.out);
  if (o.out_format == "csv")
    write_curve_csv(out, prof);
  else
    write_profile_json(out, prof);

  std::cout << "accesses " << prof.trace_stats.accesses << ", unique blocks "
            << prof.trace_stats.unique_blocks << '\n';
  std::cout << "set  n*  M*  simulated  low-confidence\n";
  std::uint64_t work = 0;
  for (const auto& s : prof.sets) {
    std::cout << s.set_index << ' ' << s.n_star << ' ' << s.m_star << ' ' << s.simulated_count
              << ' ' << (s.low_confidence ? "yes" : "no") << '\n';
    work += s.simulated_count;
  }
  std::cout << "simulated " << work << " of " << std::uint64_t{g.set_count} * g.max_assoc
            << " (set, associativity) pairs in " << std::fixed << std::setprecision(3)
            << elapsed.count() << " s\n";
  return 0;
}

ConfigVector config_of(const std::string& text) {
  if (text.empty()) throw UsageError("--config is required");
  try {
    return ConfigVector::parse(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

int cmd_query(const RunOptions& o) {
  const ConfigVector cv = config_of(o.config);
  const CacheProfile prof = profile_of(o);
  QueryResult q;
  try {
    q = query_config(prof, cv);
  } catch (const std::logic_error& e) {
    throw UsageError(e.what());
  }
  std::cout << "total " << q.total << '\n';
  for (std::size_t s = 0; s < q.per_set.size(); ++s)
    std::cout << "set " << s << " assoc " << cv.assoc_per_set[s] << " misses " << q.per_set[s]
              << ' ' << to_string(prof.sets[s].at(cv.assoc_per_set[s]).source) << '\n';
  std::cout << "worst source " << to_string(q.worst) << '\n';
  return 0;
}

int cmd_validate(const RunOptions& o) {
  if (o.trace.empty()) throw UsageError("--trace is required");
  std::vector<TraceAccess> trace;
  const CacheProfile prof = profile_of(o, &trace);
  const oracle::AccuracyReport rep = oracle::validate(prof, trace);
  if (!o.out.empty()) {
    auto out = open_out(o.out);
    out << oracle::to_json(rep).dump(2) << '\n';
  }
  std::cout << std::fixed << std::setprecision(1);
  std::cout << "exact points checked " << rep.exact_points_checked << ", predicted points "
            << rep.points_compared << '\n';
  std::cout << "max error " << 100.0 * rep.max_abs_error() << "% (+"
            << 100.0 * rep.max_overestimate << "% / " << 100.0 * rep.max_underestimate << "%)\n";
  if (!rep.ok()) {
    for (const auto& f : rep.hard_failures)
      std::cerr << "mismatch: set " << f.set << " assoc " << f.assoc << " profile " << f.predicted
                << " oracle " << f.actual << " (" << to_string(f.source) << ")\n";
    return 2;
  }
  return 0;
}

int cmd_size(const RunOptions& o) {
  if (o.sets == 0 || o.assoc == 0) throw UsageError("--sets and --assoc are required");
  CacheGeometry g{o.sets, o.line_size == 0 ? 1 : o.line_size, o.assoc};
  try {
    g.check();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::cout << "configurations " << config_space_size(g).str() << '\n';
  std::cout << "set evaluations " << std::uint64_t{g.set_count} * g.max_assoc << '\n';
  return 0;
}

int cmd_frontier(const RunOptions& o) {
  if (o.budget.empty()) throw UsageError("--budget is required");
  const CacheProfile prof = profile_of(o);
  std::vector<MissCount> budgets;
  {
    std::stringstream ss(o.budget);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        budgets.push_back(std::stoull(tok, &used));
        if (used != tok.size() || tok.find('-') != std::string::npos) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw UsageError("bad budget entry '" + tok + "'");
      }
    }
  }
  if (budgets.size() == 1) budgets.assign(prof.sets.size(), budgets[0]);
  if (budgets.size() != prof.sets.size())
    throw UsageError("need one budget, or one per set");
  const auto f = frontier(prof, budgets);
  for (std::size_t s = 0; s < f.size(); ++s) {
    std::cout << "set " << s << ' ';
    if (f[s])
      std::cout << "min assoc " << *f[s] << '\n';
    else
      std::cout << "unsatisfiable\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-set FIFO cache profiling across wear-out configurations"};
  app.require_subcommand(1);
  RunOptions o;

  auto* profile = app.add_subcommand("profile", "Profile every set of a cache from a trace");
  add_trace_flags(profile, o);
  add_predictor_flags(profile, o);
  profile->add_option("--out", o.out, "Output file");
  profile->add_option("--out-format", o.out_format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* query = app.add_subcommand("query", "Total misses of one configuration");
  query->add_option("--profile", o.profile, "Profile JSON");
  add_trace_flags(query, o);
  add_predictor_flags(query, o);
  query->add_option("--config", o.config, "Associativity per set, comma separated");

  auto* validate = app.add_subcommand("validate", "Compare a profile against brute force");
  validate->add_option("--profile", o.profile, "Profile JSON (rebuilt from the trace if absent)");
  add_trace_flags(validate, o);
  add_predictor_flags(validate, o);
  validate->add_option("--out", o.out, "Accuracy report JSON");

  auto* size = app.add_subcommand("size", "Number of wear-out reachable configurations");
  size->add_option("--sets", o.sets, "Number of cache sets");
  size->add_option("--assoc", o.assoc, "As-built associativity");
  size->add_option("--line-size", o.line_size, "Bytes per line");

  auto* front = app.add_subcommand("frontier", "Smallest associativity per set within a budget");
  front->add_option("--profile", o.profile, "Profile JSON");
  add_trace_flags(front, o);
  add_predictor_flags(front, o);
  front->add_option("--budget", o.budget, "Miss budget, one value or one per set");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*profile) return cmd_profile(o);
    if (*query) return cmd_query(o);
    if (*validate) return cmd_validate(o);
    if (*size) return cmd_size(o);
    if (*front) return cmd_frontier(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
