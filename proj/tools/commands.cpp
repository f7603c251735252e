#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <limits>

#include "lagcut/error.hpp"
#include "lagcut/instances.hpp"

namespace lagcut::cli {

namespace {

const CLI::Range kPositiveInt(1, std::numeric_limits<int>::max());
const CLI::Range kPositiveLong(1L, std::numeric_limits<long>::max());

// Dense simplex memory grows with rows^2; beyond this the extensive LP is skipped.
constexpr int kMaxExtensiveRows = 1500;

void kv(std::ostream& out, const std::string& key, const std::string& value) {
  out << key << '=' << value << '\n';
}
void kv(std::ostream& out, const std::string& key, double value) { kv(out, key, format_double(value)); }
void kv(std::ostream& out, const std::string& key, long value) { kv(out, key, std::to_string(value)); }

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create directory " + dir.string() + ": " + ec.message());
}

std::optional<double> extensive_lp_bound(const SipInstance& inst) {
  int rows = inst.first.A.rows();
  for (const auto& sc : inst.scenarios) rows += sc.num_rows();
  if (rows > kMaxExtensiveRows) return std::nullopt;
  const auto out = solve_lp(build_extensive_form(inst).program.lp);
  if (out.status != SolveStatus::Optimal) return std::nullopt;
  return out.objective;
}

// Streams trace points to disk; the final write replaces the file with the
// complete trace including z_lp.
class TraceFile {
 public:
  TraceFile(const std::filesystem::path& dir, const SipInstance& inst, const VariantConfig& cfg)
      : path_(dir / (inst.name + "." + to_string(cfg.variant) + ".csv")) {
    ensure_directory(dir);
    partial_.instance = inst.name;
    partial_.method = to_string(cfg.variant);
    stream_.open(path_, std::ios::binary | std::ios::trunc);
    if (!stream_) throw Error(ErrorCode::Io, "cannot open " + path_.string() + " for writing");
    write_trace_csv(partial_, stream_);
    stream_.flush();
  }

  std::function<void(const TracePoint&)> observer() {
    return [this](const TracePoint& p) {
      partial_.points.push_back(p);
      stream_ << format_double(p.time_s) << ',' << format_double(p.lower_bound) << ',' << p.iter
              << ',' << p.n_benders << ',' << p.n_lagrangian << ',' << p.n_intL << '\n';
      stream_.flush();
    };
  }

  void finish(const BoundTrace& trace) {
    stream_.close();
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    write_trace_csv(trace, out);
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path_.string());
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  BoundTrace partial_;
  std::ofstream stream_;
};

void print_root_counts(std::ostream& out, const RootResult& r) {
  const auto& last = r.trace.points.back();
  kv(out, "iterations", static_cast<long>(last.iter));
  kv(out, "benders_rounds", static_cast<long>(r.benders_rounds));
  kv(out, "lagrangian_rounds", static_cast<long>(r.lagrangian_rounds));
  kv(out, "oracle_calls", r.oracle_calls);
  kv(out, "n_benders", static_cast<long>(last.n_benders));
  kv(out, "n_lagrangian", static_cast<long>(last.n_lagrangian));
  kv(out, "n_intL", static_cast<long>(last.n_intL));
}

std::string gamma_label(double g) { return "profile-gamma" + format_double(g) + ".csv"; }

}  // namespace

int cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  if (opt.count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  std::vector<SipInstance> made;
  if (opt.family == "sslp") {
    for (int k = 1; k <= opt.count; ++k) {
      SslpParams p;
      p.m = opt.m;
      p.n = opt.n;
      p.n_scenarios = opt.scenarios.value_or(5);
      p.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(k));
      p.k = k;
      made.push_back(gen_sslp(p));
    }
  } else if (opt.family == "snip") {
    if (opt.budgets.empty()) throw Error(ErrorCode::InvalidArgument, "at least one budget needed");
    for (double b : opt.budgets) {
      SnipParams p;
      p.nodes = opt.nodes;
      p.arcs = opt.arcs;
      p.interdictable = opt.interdictable;
      p.budget = b;
      p.n_scenarios = opt.scenarios.value_or(4);
      p.seed = opt.seed;
      made.push_back(gen_snip(p));
    }
  } else if (opt.family == "tiny") {
    for (int k = 1; k <= opt.count; ++k) {
      TinyParams p;
      p.n = opt.tiny_n;
      p.ny = opt.tiny_ny;
      p.n_scenarios = opt.scenarios.value_or(3);
      p.seed = derive_seed(opt.seed, static_cast<std::uint64_t>(k));
      made.push_back(gen_tiny(p));
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown family " + opt.family);
  }
  ensure_directory(opt.out);
  for (const auto& inst : made) {
    const auto path = opt.out / (inst.name + ".sip");
    write_instance(inst, path);
    kv(out, "file", path.string());
  }
  kv(out, "count", static_cast<long>(made.size()));
  return kExitOk;
}

int cmd_root(const RootOptions& opt, std::ostream& out) {
  const auto inst = read_instance(opt.instance);
  opt.config.validate();
  TraceFile file(opt.out, inst, opt.config);
  const auto r = run_root_loop(inst, opt.config, file.observer());
  file.finish(r.trace);

  kv(out, "instance", inst.name);
  kv(out, "method", to_string(opt.config.variant));
  kv(out, "status", to_string(r.status));
  kv(out, "final_bound", r.trace.final_bound());
  kv(out, "root_lp_bound", r.trace.z_lp);
  if (opt.extensive_lp) {
    if (const auto lp = extensive_lp_bound(inst)) {
      kv(out, "extensive_lp", *lp);
      if (opt.reference && *opt.reference > *lp) {
        kv(out, "gap_closed", (r.trace.final_bound() - *lp) / (*opt.reference - *lp));
      }
    }
  }
  print_root_counts(out, r);
  kv(out, "wall_time", r.wall_time);
  kv(out, "trace", file.path().string());
  return kExitOk;
}

int cmd_solve(const SolveOptions& opt, std::ostream& out) {
  if (opt.mode != "lbc" && opt.mode != "bbc") {
    throw Error(ErrorCode::InvalidArgument, "mode must be lbc or bbc");
  }
  const auto inst = read_instance(opt.instance);
  VariantConfig cfg = opt.config;
  if (opt.mode == "bbc") cfg.variant = Variant::BendersOnly;
  cfg.validate();

  std::optional<TraceFile> file;
  if (opt.out) file.emplace(*opt.out, inst, cfg);
  std::function<void(const TracePoint&)> observer;
  if (file) observer = file->observer();
  auto root = run_root_loop(inst, cfg, observer);
  if (file) file->finish(root.trace);

  BranchAndCutOptions bc;
  bc.workers = cfg.workers;
  bc.max_nodes = opt.max_nodes;
  bc.time_limit = std::max(0.0, cfg.time_limit - root.wall_time);
  const double root_bound = root.trace.final_bound();
  const auto res = run_branch_and_cut(inst, std::move(root.master), bc);

  kv(out, "instance", inst.name);
  kv(out, "mode", opt.mode);
  kv(out, "method", to_string(cfg.variant));
  kv(out, "status", to_string(res.status));
  kv(out, "objective", res.objective);
  kv(out, "bound", res.bound);
  kv(out, "gap", res.gap);
  kv(out, "nodes", res.node_count);
  kv(out, "lazy_cuts", res.lazy_cuts);
  kv(out, "root_bound", root_bound);
  kv(out, "root_status", to_string(root.status));
  kv(out, "root_time", root.wall_time);
  kv(out, "bc_time", res.wall_time);
  if (!res.x.empty()) kv(out, "x", join(res.x));
  if (file) kv(out, "trace", file->path().string());
  return res.status == SolveStatus::LimitReached ? kExitTimeLimit : kExitOk;
}

int cmd_profile(const ProfileOptions& opt, std::ostream& out) {
  if (opt.traces.empty()) throw Error(ErrorCode::InvalidArgument, "no trace files given");
  if (opt.gammas.empty()) throw Error(ErrorCode::InvalidArgument, "no gamma values given");
  std::vector<BoundTrace> traces;
  for (const auto& path : opt.traces) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    try {
      traces.push_back(read_trace_csv(in));
    } catch (const ParseError& e) {
      throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
  }
  if (opt.out) ensure_directory(*opt.out);
  std::vector<ProfileRow> all;
  for (double g : opt.gammas) {
    const auto rows = gap_closed_profile(traces, g);
    if (opt.out) {
      const auto path = *opt.out / gamma_label(g);
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      write_profile_csv(rows, f);
      if (!f) throw Error(ErrorCode::Io, "write failed for " + path.string());
      kv(out, "file", path.string());
    } else {
      all.insert(all.end(), rows.begin(), rows.end());
    }
  }
  if (!opt.out) write_profile_csv(all, out);
  return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lagrangian cuts for two-stage stochastic integer programs"};
  app.name(argc > 0 ? argv[0] : "lagcut");
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* g = app.add_subcommand("generate", "Write seeded instance files");
  g->add_option("family", gen.family, "sslp, snip or tiny")
      ->check(CLI::IsMember({"sslp", "snip", "tiny"}))
      ->required();
  g->add_option("--seed", gen.seed, "Master seed; files use derived sub-seeds")->envname("LAGCUT_SEED");
  g->add_option("--count", gen.count, "sslp/tiny: files per size")->check(kPositiveInt);
  g->add_option("--m", gen.m, "sslp: sites")->check(kPositiveInt);
  g->add_option("--n", gen.n, "sslp: clients")->check(kPositiveInt);
  g->add_option("--scenarios", gen.scenarios, "Scenario count")->check(kPositiveInt);
  g->add_option("--nodes", gen.nodes, "snip: nodes")->check(kPositiveInt);
  g->add_option("--arcs", gen.arcs, "snip: arcs")->check(kPositiveInt);
  g->add_option("--interdictable", gen.interdictable, "snip: sensor arcs")->check(kPositiveInt);
  g->add_option("--budget", gen.budgets, "snip: budgets, one file each")->delimiter(',');
  g->add_option("--first", gen.tiny_n, "tiny: first-stage binaries")->check(kPositiveInt);
  g->add_option("--second", gen.tiny_ny, "tiny: second-stage integers")->check(kPositiveInt);
  g->add_option("--out", gen.out, "Output directory")->envname("LAGCUT_OUT");

  // Options shared by root and solve.
  std::string variant_name = "RstrMIP";
  auto add_config = [&](CLI::App* sub, VariantConfig& cfg) {
    sub->add_option("--variant", variant_name,
                    "StrBen, Exact, Rstr1, Rstr2, RstrMIP or BendersOnly")
        ->envname("LAGCUT_VARIANT")
        ->check([](const std::string& v) {
          return parse_variant(v) ? std::string{} : "unknown variant " + v;
        });
    sub->add_option("--delta", cfg.delta, "Relative gap tolerance of the separation")
        ->envname("LAGCUT_DELTA")
        ->check(CLI::Range(0.0, 0.999999));
    sub->add_option("--K", cfg.K, "Basis size of restricted variants")
        ->envname("LAGCUT_K")
        ->check(kPositiveInt);
    sub->add_option("--alpha", cfg.alpha, "Weight of pi0 in the normalization")
        ->envname("LAGCUT_ALPHA")
        ->check(CLI::PositiveNumber);
    sub->add_option("--time-limit", cfg.time_limit, "Seconds")
        ->envname("LAGCUT_TIME_LIMIT")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--workers", cfg.workers, "Threads for per-scenario work")
        ->envname("LAGCUT_WORKERS")
        ->check(kPositiveInt);
    sub->add_flag("!--no-early-stop", cfg.early_stop.enabled, "Run Lagrangian rounds to closure");
    sub->add_flag("--iteration-clock", cfg.iteration_clock,
                  "Record iteration numbers instead of seconds in traces");
  };

  RootOptions root;
  auto* r = app.add_subcommand("root", "Root-node cutting-plane loop; writes a bound trace");
  r->add_option("instance", root.instance, "Instance file")->required()->check(CLI::ExistingFile);
  add_config(r, root.config);
  r->add_option("--out", root.out, "Trace directory")->envname("LAGCUT_OUT");
  r->add_option("--reference", root.reference, "Best known optimum, enables gap_closed");
  r->add_flag("!--no-extensive-lp", root.extensive_lp, "Skip the extensive LP bound");

  SolveOptions solve;
  auto* s = app.add_subcommand("solve", "Root cuts then branch-and-cut to optimality");
  s->add_option("instance", solve.instance, "Instance file")->required()->check(CLI::ExistingFile);
  s->add_option("--mode", solve.mode, "lbc or bbc")->check(CLI::IsMember({"lbc", "bbc"}));
  add_config(s, solve.config);
  s->add_option("--max-nodes", solve.max_nodes, "Node limit")->check(kPositiveLong);
  s->add_option("--out", solve.out, "Directory for the root trace")->envname("LAGCUT_OUT");

  ProfileOptions prof;
  std::optional<std::filesystem::path> prof_out;
  auto* p = app.add_subcommand("profile", "Gap-closed profiles over bound traces");
  p->add_option("traces", prof.traces, "Trace CSV files")->required()->check(CLI::ExistingFile);
  p->add_option("--gamma", prof.gammas, "Fractions of the best closed gap")
      ->delimiter(',')
      ->check(CLI::Range(1e-12, 1.0));
  p->add_option("--out", prof_out, "Directory for one CSV per gamma (default: stdout)")
      ->envname("LAGCUT_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto variant = *parse_variant(variant_name);
  root.config.variant = variant;
  solve.config.variant = variant;
  prof.out = prof_out;
  try {
    if (*g) return cmd_generate(gen, out);
    if (*r) return cmd_root(root, out);
    if (*s) return cmd_solve(solve, out);
    return cmd_profile(prof, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::InvalidArgument:
      case ErrorCode::Parse:
      case ErrorCode::VersionMismatch:
      case ErrorCode::Io:
      case ErrorCode::DimensionMismatch:
      case ErrorCode::ProbabilitySum:
        return kExitUsage;
      default:
        return kExitSolverFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lagcut::cli
