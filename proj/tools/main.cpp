// Command-line front end: runs the training pipeline stages, interpolation
// and curve-finding experiments, and assembles report CSVs from run
// manifests. Every command is deterministic given its config: reruns emit
// byte-identical files (manifests carry no timestamps, paths are relative).
//
// Exit codes: 0 success, 1 invalid input/config, 2 runtime failure.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sllb/bezier.hpp"
#include "sllb/checkpoint.hpp"
#include "sllb/csv.hpp"
#include "sllb/error.hpp"
#include "sllb/experiment.hpp"
#include "sllb/landscape.hpp"
#include "sllb/mask.hpp"
#include "sllb/network.hpp"
#include "sllb/train.hpp"
#include "sllb/util.hpp"

using namespace sllb;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr uint64_t kEvalPartitionSeed = 17;  // fixed batch partition for profiles

struct CommonArgs {
  std::string config_path;
  std::string out_dir;  // --out beats SLLB_OUT beats config.out_dir
  std::optional<int64_t> seed;
};

ExperimentConfig load_effective_config(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args.config_path);
  if (args.seed) {
    cfg.train.seed = static_cast<uint64_t>(*args.seed);
    cfg.path.seed = static_cast<uint64_t>(*args.seed);
  }
  if (!args.out_dir.empty()) {
    cfg.out_dir = args.out_dir;
  } else if (auto env = env_string("SLLB_OUT")) {
    cfg.out_dir = *env;
  }
  cfg.validate();
  return cfg;
}

int64_t eval_threads() {
  if (auto t = env_int("SLLB_THREADS")) return std::max<int64_t>(1, *t);
  return 1;
}

fs::path out_path(const ExperimentConfig& cfg, const std::string& name) {
  return fs::path(cfg.out_dir) / name;
}

void require_checkpoint(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw RuntimeError("missing prerequisite checkpoint: " + path.string() + " (run `" +
                       producer + "` first)");
  }
}

Checkpoint solution_checkpoint(const ExperimentConfig& cfg, const std::string& command,
                               const std::string& tag, const ParamVector& params,
                               const std::optional<SparsityMask>& mask, const BnState& bn,
                               int64_t step) {
  Checkpoint ckpt;
  ckpt.arch = cfg.arch;
  ckpt.vectors = {params};
  ckpt.mask = mask;
  ckpt.bn = bn;
  ckpt.command = command;
  ckpt.config_hash = config_hash(cfg);
  ckpt.seed = cfg.train.seed;
  ckpt.step = step;
  ckpt.tag = tag;
  return ckpt;
}

void write_manifest(const ExperimentConfig& cfg, const std::string& tag, json manifest) {
  manifest["config_hash"] = hex64(config_hash(cfg));
  write_file_atomic(out_path(cfg, tag + ".run.json").string(), manifest.dump(2) + "\n");
}

// Shared tail of the four training commands: solution checkpoint, history
// CSV, and the run manifest with the final test accuracy.
void emit_solution(const ExperimentConfig& cfg, const std::string& command,
                   const std::string& tag, const Solution& sol,
                   std::optional<double> sparsity = std::nullopt) {
  write_checkpoint(out_path(cfg, tag + ".ckpt").string(),
                   solution_checkpoint(cfg, command, tag, sol.params, sol.mask, sol.bn,
                                       cfg.train.total_steps - 1));
  write_history_csv(out_path(cfg, tag + ".history.csv").string(), sol.history);
  json m;
  m["command"] = command;
  m["tag"] = tag;
  m["seed"] = cfg.train.seed;
  m["final_eval_accuracy"] = sol.final_eval_accuracy();
  if (sparsity) m["sparsity"] = *sparsity;
  m["outputs"] = {{"checkpoint", tag + ".ckpt"}, {"history", tag + ".history.csv"}};
  write_manifest(cfg, tag, std::move(m));
}

void check_layout_match(const Checkpoint& a, const Checkpoint& b) {
  auto la = make_layout(a.arch);
  auto lb = make_layout(b.arch);
  if (*la == *lb) return;
  const auto& sa = la->segments();
  const auto& sb = lb->segments();
  std::string detail;
  for (size_t i = 0; i < std::max(sa.size(), sb.size()); ++i) {
    auto describe = [](const SegmentDesc& d) {
      std::string s = "layer " + std::to_string(d.layer) + " " + segment_kind_name(d.kind) +
                      " shape (";
      for (size_t k = 0; k < d.shape.size(); ++k) {
        if (k) s += "x";
        s += std::to_string(d.shape[k]);
      }
      return s + ")";
    };
    const bool in_a = i < sa.size(), in_b = i < sb.size();
    if (in_a && in_b && sa[i] == sb[i]) continue;
    detail += "\n  segment " + std::to_string(i) + ": " +
              (in_a ? describe(sa[i]) : std::string("absent")) + " vs " +
              (in_b ? describe(sb[i]) : std::string("absent"));
  }
  throw ValidationError("checkpoints are not layout-compatible:" + detail);
}

// ------------------------------------------------------------ training cmds

void cmd_train_dense(const CommonArgs& args) {
  ExperimentConfig cfg = load_effective_config(args);
  Dataset data = cfg.task.load();
  Network net(cfg.arch);
  ParamVector init = init_params(cfg.arch, cfg.train.seed);
  write_checkpoint(out_path(cfg, "dense_init.ckpt").string(),
                   solution_checkpoint(cfg, "train-dense", "dense_init", init, std::nullopt,
                                       make_bn_state(cfg.arch), 0));
  Solution sol = train(net, cfg.train, init, std::nullopt, data, Provenance::Dense);
  emit_solution(cfg, "train-dense", "dense", sol);
}

void cmd_prune(const CommonArgs& args) {
  ExperimentConfig cfg = load_effective_config(args);
  const fs::path init_path = out_path(cfg, "dense_init.ckpt");
  require_checkpoint(init_path, "train-dense");
  Checkpoint init_ckpt = read_checkpoint(init_path.string());
  Dataset data = cfg.task.load();
  Network net(cfg.arch);
  if (!(init_ckpt.params().layout() == *net.layout())) {
    throw ValidationError(init_path.string() + ": layout does not match the configured network");
  }
  Solution sol = prune_train(net, cfg.train, cfg.prune, init_ckpt.params(), data, cfg.exclusions,
                             cfg.mask_scope, cfg.prune_monotone);
  emit_solution(cfg, "prune", "pruned", sol, cfg.prune.final_sparsity);
}

void cmd_train_sparse(const CommonArgs& args, const std::string& init_kind) {
  ExperimentConfig cfg = load_effective_config(args);
  const fs::path pruned_path = out_path(cfg, "pruned.ckpt");
  require_checkpoint(pruned_path, "prune");
  Checkpoint pruned = read_checkpoint(pruned_path.string());
  if (!pruned.mask) {
    throw ValidationError(pruned_path.string() + " carries no sparsity mask");
  }
  Dataset data = cfg.task.load();
  Network net(cfg.arch);
  if (!(pruned.params().layout() == *net.layout())) {
    throw ValidationError(pruned_path.string() + ": layout does not match the configured network");
  }

  ParamVector start;
  Provenance prov;
  if (init_kind == "lottery") {
    const fs::path init_path = out_path(cfg, "dense_init.ckpt");
    require_checkpoint(init_path, "train-dense");
    Checkpoint dense_init = read_checkpoint(init_path.string());
    check_layout_match(dense_init, pruned);
    start = apply_mask(dense_init.params(), *pruned.mask);
    prov = Provenance::Lottery;
  } else {
    start = scratch_init(cfg.arch, cfg.train.seed, *pruned.mask);
    prov = Provenance::Scratch;
  }
  const std::string tag = init_kind;
  write_checkpoint(out_path(cfg, tag + "_init.ckpt").string(),
                   solution_checkpoint(cfg, "train-sparse", tag + "_init", start, pruned.mask,
                                       make_bn_state(cfg.arch), 0));
  Solution sol = train(net, cfg.train, start, pruned.mask, data, prov);
  emit_solution(cfg, "train-sparse", tag, sol, cfg.prune.final_sparsity);
}

void cmd_sparse_init_sweep(const CommonArgs& args) {
  ExperimentConfig cfg = load_effective_config(args);
  Dataset data = cfg.task.load();
  Network net(cfg.arch);
  auto runs = sparse_init_sweep(net, cfg.train, cfg.grids.zero_fractions, data, cfg.exclusions);
  CsvTable table;
  table.header = {"zero_fraction", "final_accuracy"};
  json rows = json::array();
  for (const auto& r : runs) {
    table.rows.push_back({r.zero_fraction, r.final_accuracy});
    rows.push_back({{"zero_fraction", r.zero_fraction}, {"accuracy", r.final_accuracy}});
  }
  write_table_csv(out_path(cfg, "sparse_init_sweep.csv").string(), table);
  json m;
  m["command"] = "sparse-init-sweep";
  m["tag"] = "sparse_init";
  m["seed"] = cfg.train.seed;
  m["rows"] = rows;
  m["outputs"] = {{"table", "sparse_init_sweep.csv"}};
  write_manifest(cfg, "sparse_init", std::move(m));
}

// ------------------------------------------------------------ analysis cmds

std::vector<double> parse_grid_flag(const std::string& flag, const GridSpec& fallback) {
  if (flag.empty()) return make_grid(fallback.t_lo, fallback.t_hi, fallback.t_step);
  double lo = 0.0, hi = 0.0, step = 0.0;
  if (std::sscanf(flag.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3) {
    throw ValidationError("--grid expects lo:hi:step, got \"" + flag + "\"");
  }
  return make_grid(lo, hi, step);
}

std::string pair_name(const std::string& prefix, const fs::path& a, const fs::path& b) {
  return prefix + "_" + a.stem().string() + "__" + b.stem().string();
}

struct ProfileStats {
  MonotonicityScore mono;
  double barrier = 0.0;
  double max_loss = 0.0;
};

ProfileStats profile_stats(const LossProfile& profile) {
  ProfileStats s;
  s.mono = monotonicity_score(profile, 0.0, 1.0);
  s.barrier = barrier_height(profile);
  s.max_loss = -std::numeric_limits<double>::infinity();
  for (const auto& p : profile.points) {
    if (p.t >= 0.0 && p.t <= 1.0) s.max_loss = std::max(s.max_loss, p.loss.total);
  }
  return s;
}

void cmd_interpolate(const CommonArgs& args, const std::string& path_a, const std::string& path_b,
                     const std::string& grid_flag) {
  ExperimentConfig cfg = load_effective_config(args);
  Checkpoint a = read_checkpoint(path_a);
  Checkpoint b = read_checkpoint(path_b);
  check_layout_match(a, b);
  Dataset data = cfg.task.load();
  Network net(a.arch);
  Evaluator ev(net, data, cfg.train.weight_decay, cfg.train.batch_size, kEvalPartitionSeed,
               cfg.train.l2_scope);
  const auto grid = parse_grid_flag(grid_flag, cfg.grids);
  LossProfile profile = profile_line(a.params(), b.params(), grid, ev, eval_threads());
  profile.endpoint_s = a.tag;
  profile.endpoint_e = b.tag;

  const std::string name = pair_name("interp", path_a, path_b);
  write_profile_csv(out_path(cfg, name + ".profile.csv").string(), profile);

  const ProfileStats s = profile_stats(profile);
  std::string summary = "pair,num_increases,max_increase,violation_mass,barrier_height,max_loss\n";
  summary += a.tag + "__" + b.tag + ',' + std::to_string(s.mono.num_increases) + ',' +
             format_f64(s.mono.max_increase) + ',' + format_f64(s.mono.violation_mass) + ',' +
             format_f64(s.barrier) + ',' + format_f64(s.max_loss) + '\n';
  write_file_atomic(out_path(cfg, name + ".summary.csv").string(), summary);

  json m;
  m["command"] = "interpolate";
  m["tag"] = name;
  m["seed"] = cfg.train.seed;
  m["pair"] = a.tag + "__" + b.tag;
  m["num_increases"] = s.mono.num_increases;
  m["max_increase"] = s.mono.max_increase;
  m["violation_mass"] = s.mono.violation_mass;
  m["degenerate_denominator"] = s.mono.degenerate_denominator;
  m["barrier_height"] = s.barrier;
  m["max_loss"] = s.max_loss;
  m["outputs"] = {{"profile", name + ".profile.csv"}, {"summary", name + ".summary.csv"}};
  write_manifest(cfg, name, std::move(m));
}

void cmd_find_path(const CommonArgs& args, const std::string& path_a, const std::string& path_b,
                   int order, const std::string& subspace, bool sweep) {
  ExperimentConfig cfg = load_effective_config(args);
  Checkpoint a = read_checkpoint(path_a);
  Checkpoint b = read_checkpoint(path_b);
  check_layout_match(a, b);

  std::optional<SparsityMask> constraint;
  if (subspace == "sparse") {
    if (!a.mask || !b.mask || a.mask->bits() != b.mask->bits()) {
      throw ValidationError("--subspace sparse requires both checkpoints to carry the same mask");
    }
    constraint = a.mask;
  }

  Dataset data = cfg.task.load();
  Network net(a.arch);
  Evaluator ev(net, data, cfg.train.weight_decay, cfg.train.batch_size, kEvalPartitionSeed,
               cfg.train.l2_scope);
  const auto grid = make_grid(0.0, 1.0, cfg.grids.t_step);

  struct Attempt {
    double lr, momentum, max_loss, barrier;
  };
  std::vector<Attempt> attempts;
  BezierPath best_path;
  std::vector<PathTraceRow> best_trace;
  LossProfile best_profile;
  double best_max = std::numeric_limits<double>::infinity();

  std::vector<std::pair<double, double>> settings;
  if (sweep) {
    for (double lr : {1.0, 0.1, 0.01, 0.001}) {
      for (double mu : {0.9, 0.95, 0.99, 0.995}) settings.push_back({lr, mu});
    }
  } else {
    settings.push_back({cfg.path.base_lr, cfg.path.momentum});
  }

  for (auto [lr, mu] : settings) {
    PathOptConfig pc = cfg.path;
    pc.base_lr = lr;
    pc.momentum = mu;
    auto [path, trace] = optimize_path(net, a.params(), b.params(), order, constraint, pc, data);
    LossProfile profile = profile_path(path, grid, ev, eval_threads());
    profile.endpoint_s = a.tag;
    profile.endpoint_e = b.tag;
    const ProfileStats s = profile_stats(profile);
    attempts.push_back({lr, mu, s.max_loss, s.barrier});
    if (s.max_loss < best_max) {
      best_max = s.max_loss;
      best_path = std::move(path);
      best_trace = std::move(trace);
      best_profile = std::move(profile);
    }
  }

  const std::string name =
      pair_name("path_" + subspace + std::to_string(order), path_a, path_b);
  const Attempt* best_attempt = &attempts[0];
  for (const auto& at : attempts) {
    if (at.max_loss == best_max) {
      best_attempt = &at;
      break;
    }
  }

  Checkpoint out;
  out.arch = a.arch;
  out.order = order;
  out.vectors = best_path.control_points;
  out.mask = constraint;
  out.bn = make_bn_state(a.arch);
  out.command = "find-path";
  out.config_hash = config_hash(cfg);
  out.seed = cfg.path.seed;
  out.step = cfg.path.steps;
  out.tag = name;
  write_checkpoint(out_path(cfg, name + ".ckpt").string(), out);
  write_profile_csv(out_path(cfg, name + ".profile.csv").string(), best_profile);

  CsvTable trace_table;
  trace_table.header = {"step", "t", "total", "cross_entropy", "l2_term", "accuracy"};
  for (const auto& r : best_trace) {
    trace_table.rows.push_back({static_cast<double>(r.step), r.t, r.loss.total,
                                r.loss.cross_entropy, r.loss.l2_term, r.loss.accuracy});
  }
  write_table_csv(out_path(cfg, name + ".trace.csv").string(), trace_table);

  json m;
  m["command"] = "find-path";
  m["tag"] = name;
  m["seed"] = cfg.path.seed;
  m["pair"] = a.tag + "__" + b.tag;
  m["subspace"] = subspace;
  m["order"] = order;
  m["base_lr"] = best_attempt->lr;
  m["momentum"] = best_attempt->momentum;
  m["max_loss"] = best_max;
  m["barrier_height"] = best_attempt->barrier;
  m["outputs"] = {{"checkpoint", name + ".ckpt"},
                  {"profile", name + ".profile.csv"},
                  {"trace", name + ".trace.csv"}};
  if (sweep) {
    CsvTable sweep_table;
    sweep_table.header = {"base_lr", "momentum", "max_loss", "barrier_height"};
    for (const auto& at : attempts) {
      sweep_table.rows.push_back({at.lr, at.momentum, at.max_loss, at.barrier});
    }
    write_table_csv(out_path(cfg, name + ".sweep.csv").string(), sweep_table);
    m["outputs"]["sweep"] = name + ".sweep.csv";
  }
  write_manifest(cfg, name, std::move(m));
}

// ---------------------------------------------------------------- reporting

struct FoundRun {
  fs::path manifest;
  json data;
};

void cmd_report(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw ValidationError(dir + " is not a directory");
  }
  std::vector<fs::path> manifest_paths;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().string().ends_with(".run.json")) {
      manifest_paths.push_back(e.path());
    }
  }
  std::sort(manifest_paths.begin(), manifest_paths.end());
  if (manifest_paths.empty()) {
    throw ValidationError("no completed runs found in " + dir);
  }

  std::vector<FoundRun> runs;
  std::vector<std::string> incomplete;
  for (const auto& p : manifest_paths) {
    json m;
    try {
      m = json::parse(read_file(p.string()));
    } catch (const json::exception& e) {
      incomplete.push_back(p.string() + " (unreadable: " + e.what() + ")");
      continue;
    }
    bool complete = m.contains("outputs");
    if (complete) {
      for (const auto& [key, rel] : m.at("outputs").items()) {
        (void)key;
        if (!fs::exists(p.parent_path() / rel.get<std::string>())) {
          complete = false;
          break;
        }
      }
    }
    if (!complete) {
      incomplete.push_back(p.string());
    } else {
      runs.push_back({p, std::move(m)});
    }
  }
  if (!incomplete.empty()) {
    std::string msg = "incomplete runs:";
    for (const auto& n : incomplete) msg += "\n  " + n;
    throw ValidationError(msg);
  }

  // accuracy table: one row per (sparsity, method, seed)
  struct SummaryRow {
    double sparsity;
    std::string method;
    int64_t seed;
    double accuracy;
  };
  std::vector<SummaryRow> summary;
  std::string interp = "pair,seed,num_increases,max_increase,violation_mass,barrier_height,max_loss\n";
  std::string paths = "pair,subspace,order,seed,max_loss,barrier_height\n";
  std::string sweep = "zero_fraction,seed,accuracy\n";
  size_t n_interp = 0, n_paths = 0, n_sweep = 0;

  for (const auto& r : runs) {
    const json& m = r.data;
    const std::string command = m.value("command", "");
    const auto seed = m.value("seed", int64_t{0});
    if (command == "prune" || command == "train-sparse") {
      summary.push_back({m.value("sparsity", 0.0), m.value("tag", ""), seed,
                         m.value("final_eval_accuracy", 0.0)});
    } else if (command == "sparse-init-sweep") {
      for (const auto& row : m.value("rows", json::array())) {
        const double f = row.value("zero_fraction", 0.0);
        const double acc = row.value("accuracy", 0.0);
        summary.push_back({f, "sparse_init", seed, acc});
        sweep += format_f64(f) + ',' + std::to_string(seed) + ',' + format_f64(acc) + '\n';
        ++n_sweep;
      }
    } else if (command == "interpolate") {
      interp += m.value("pair", "") + ',' + std::to_string(seed) + ',' +
                std::to_string(m.value("num_increases", int64_t{0})) + ',' +
                format_f64(m.value("max_increase", 0.0)) + ',' +
                format_f64(m.value("violation_mass", 0.0)) + ',' +
                format_f64(m.value("barrier_height", 0.0)) + ',' +
                format_f64(m.value("max_loss", 0.0)) + '\n';
      ++n_interp;
    } else if (command == "find-path") {
      paths += m.value("pair", "") + ',' + m.value("subspace", "") + ',' +
               std::to_string(m.value("order", int64_t{0})) + ',' + std::to_string(seed) + ',' +
               format_f64(m.value("max_loss", 0.0)) + ',' +
               format_f64(m.value("barrier_height", 0.0)) + '\n';
      ++n_paths;
    }
  }

  std::stable_sort(summary.begin(), summary.end(), [](const SummaryRow& x, const SummaryRow& y) {
    if (x.sparsity != y.sparsity) return x.sparsity < y.sparsity;
    if (x.method != y.method) return x.method < y.method;
    return x.seed < y.seed;
  });
  std::string summary_csv = "sparsity,method,seed,accuracy\n";
  for (const auto& row : summary) {
    summary_csv += format_f64(row.sparsity) + ',' + row.method + ',' + std::to_string(row.seed) +
                   ',' + format_f64(row.accuracy) + '\n';
  }

  const fs::path base(dir);
  write_file_atomic((base / "summary.csv").string(), summary_csv);
  write_file_atomic((base / "interpolations.csv").string(), interp);
  write_file_atomic((base / "paths.csv").string(), paths);
  write_file_atomic((base / "zero_fraction_sweep.csv").string(), sweep);
  std::printf("report: %zu summary rows, %zu interpolations, %zu paths, %zu sweep rows -> %s\n",
              summary.size(), n_interp, n_paths, n_sweep, dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse-training laboratory: pipeline stages, landscape probes, reports"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string ckpt_a, ckpt_b, grid_flag, init_kind = "lottery", subspace = "dense";
  std::string report_dir;
  int order = 2;
  bool sweep = false;

  auto add_common = [&](CLI::App* sub, bool config_required = true) {
    auto* opt = sub->add_option("--config", common.config_path, "experiment config (JSON)");
    if (config_required) opt->required();
    sub->add_option("--seed", common.seed, "override train/path seeds");
    sub->add_option("--out", common.out_dir, "output directory (beats SLLB_OUT and config)");
  };

  auto* td = app.add_subcommand("train-dense", "train the dense baseline from a fresh init");
  add_common(td);
  auto* pr = app.add_subcommand("prune", "train with gradual magnitude pruning from dense_init");
  add_common(pr);
  auto* ts = app.add_subcommand("train-sparse", "train under the pruned mask");
  add_common(ts);
  ts->add_option("--init", init_kind, "starting point")
      ->check(CLI::IsMember({"lottery", "scratch"}))
      ->required();
  auto* sw = app.add_subcommand("sparse-init-sweep", "dense training with zeroed-out fractions");
  add_common(sw);
  auto* in = app.add_subcommand("interpolate", "loss profile along the line between checkpoints");
  add_common(in);
  in->add_option("a", ckpt_a, "first checkpoint")->required();
  in->add_option("b", ckpt_b, "second checkpoint")->required();
  in->add_option("--grid", grid_flag, "t grid as lo:hi:step (default from config)");
  auto* fp = app.add_subcommand("find-path", "optimize a low-loss curve between checkpoints");
  add_common(fp);
  fp->add_option("a", ckpt_a, "first checkpoint")->required();
  fp->add_option("b", ckpt_b, "second checkpoint")->required();
  fp->add_option("--order", order, "curve order")->check(CLI::IsMember({2, 3}));
  fp->add_option("--subspace", subspace, "control-point space")
      ->check(CLI::IsMember({"sparse", "dense"}));
  fp->add_flag("--sweep", sweep, "4x4 lr/momentum grid, keep the best by max loss");
  auto* rp = app.add_subcommand("report", "assemble CSV tables from run manifests");
  rp->add_option("dir", report_dir, "experiment directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (td->parsed()) {
      cmd_train_dense(common);
    } else if (pr->parsed()) {
      cmd_prune(common);
    } else if (ts->parsed()) {
      cmd_train_sparse(common, init_kind);
    } else if (sw->parsed()) {
      cmd_sparse_init_sweep(common);
    } else if (in->parsed()) {
      cmd_interpolate(common, ckpt_a, ckpt_b, grid_flag);
    } else if (fp->parsed()) {
      cmd_find_path(common, ckpt_a, ckpt_b, order, subspace, sweep);
    } else if (rp->parsed()) {
      cmd_report(report_dir);
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const RuntimeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
