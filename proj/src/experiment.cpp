#include "sllb/experiment.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

#include "sllb/error.hpp"
#include "sllb/idx.hpp"
#include "sllb/util.hpp"

namespace sllb {

namespace {

using nlohmann::json;

// Field-presence-tolerant readers: absent keys keep the default.
template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_task(const json& j, TaskSpec& task) {
  if (j.contains("kind")) task.kind = synthetic_kind_from_name(j.at("kind").get<std::string>());
  get_if(j, "n", task.n);
  get_if(j, "noise", task.noise);
  get_if(j, "seed", task.seed);
  get_if(j, "idx_images", task.idx_images);
  get_if(j, "idx_labels", task.idx_labels);
}

void parse_arch(const json& j, Architecture& arch) {
  if (j.contains("layer_sizes")) {
    arch.layer_sizes = j.at("layer_sizes").get<std::vector<int64_t>>();
    arch.use_batchnorm.assign(arch.layer_sizes.size() >= 2 ? arch.layer_sizes.size() - 2 : 0, 0);
  }
  if (j.contains("batchnorm")) {
    const auto& b = j.at("batchnorm");
    if (b.is_boolean()) {
      std::fill(arch.use_batchnorm.begin(), arch.use_batchnorm.end(),
                b.get<bool>() ? uint8_t{1} : uint8_t{0});
    } else {
      auto flags = b.get<std::vector<bool>>();
      arch.use_batchnorm.assign(flags.size(), 0);
      for (size_t i = 0; i < flags.size(); ++i) arch.use_batchnorm[i] = flags[i] ? 1 : 0;
    }
  }
}

void parse_train(const json& j, TrainConfig& t) {
  get_if(j, "total_steps", t.total_steps);
  get_if(j, "batch_size", t.batch_size);
  get_if(j, "base_lr", t.lr.base_lr);
  get_if(j, "warmup_steps", t.lr.warmup_steps);
  get_if(j, "drop_steps", t.lr.drop_steps);
  get_if(j, "drop_factor", t.lr.drop_factor);
  get_if(j, "momentum", t.momentum);
  get_if(j, "weight_decay", t.weight_decay);
  get_if(j, "seed", t.seed);
  get_if(j, "eval_every", t.eval_every);
  if (j.contains("l2_scope")) {
    auto s = j.at("l2_scope").get<std::string>();
    if (s == "weights_only") {
      t.l2_scope = L2Scope::WeightsOnly;
    } else if (s == "all") {
      t.l2_scope = L2Scope::All;
    } else {
      throw ValidationError("train.l2_scope must be \"weights_only\" or \"all\", got \"" + s +
                            "\"");
    }
  }
}

void parse_prune(const json& j, ExperimentConfig& c) {
  get_if(j, "start_step", c.prune.start_step);
  get_if(j, "end_step", c.prune.end_step);
  get_if(j, "frequency", c.prune.frequency);
  get_if(j, "initial_sparsity", c.prune.initial_sparsity);
  get_if(j, "final_sparsity", c.prune.final_sparsity);
  get_if(j, "exponent", c.prune.exponent);
  get_if(j, "skip_first_layer", c.exclusions.skip_first_layer);
  get_if(j, "monotone", c.prune_monotone);
  if (j.contains("layer_caps")) {
    for (const auto& [key, value] : j.at("layer_caps").items()) {
      c.exclusions.layer_caps[std::stoi(key)] = value.get<double>();
    }
  }
  if (j.contains("scope")) {
    auto s = j.at("scope").get<std::string>();
    if (s == "per_layer") {
      c.mask_scope = MaskScope::PerLayer;
    } else if (s == "global") {
      c.mask_scope = MaskScope::Global;
    } else {
      throw ValidationError("prune.scope must be \"per_layer\" or \"global\", got \"" + s + "\"");
    }
  }
}

void parse_path(const json& j, PathOptConfig& p) {
  get_if(j, "steps", p.steps);
  get_if(j, "batch_size", p.batch_size);
  get_if(j, "base_lr", p.base_lr);
  get_if(j, "momentum", p.momentum);
  get_if(j, "weight_decay", p.weight_decay);
  get_if(j, "seed", p.seed);
}

void parse_grids(const json& j, GridSpec& g) {
  get_if(j, "t_lo", g.t_lo);
  get_if(j, "t_hi", g.t_hi);
  get_if(j, "t_step", g.t_step);
  get_if(j, "sparsity_levels", g.sparsity_levels);
  get_if(j, "zero_fractions", g.zero_fractions);
}

json task_json(const TaskSpec& t) {
  json j;
  j["kind"] = synthetic_kind_name(t.kind);
  j["n"] = t.n;
  j["noise"] = t.noise;
  j["seed"] = t.seed;
  j["idx_images"] = t.idx_images;
  j["idx_labels"] = t.idx_labels;
  return j;
}

}  // namespace

Dataset TaskSpec::load() const {
  if (from_idx()) {
    if (idx_labels.empty()) {
      throw ValidationError("task: idx_images given without idx_labels");
    }
    return load_idx_dataset(idx_images, idx_labels, seed);
  }
  return make_synthetic(kind, n, noise, seed);
}

void ExperimentConfig::validate() const {
  std::vector<std::string> problems;
  auto collect = [&](const char* field, const std::function<void()>& check) {
    try {
      check();
    } catch (const ValidationError& e) {
      problems.push_back(std::string(field) + ": " + e.what());
    }
  };
  collect("task", [&] {
    if (!task.from_idx()) {
      if (task.n < 10) throw ValidationError("n must be >= 10");
      if (!(task.noise >= 0.0)) throw ValidationError("noise must be >= 0");
    }
  });
  collect("architecture", [&] { arch.validate(); });
  collect("train", [&] { train.validate(); });
  collect("prune", [&] {
    prune.validate();
    if (prune.end_step > train.total_steps) {
      throw ValidationError("end_step exceeds train.total_steps");
    }
    for (const auto& [layer, cap] : exclusions.layer_caps) {
      if (!(cap >= 0.0 && cap <= 1.0)) {
        throw ValidationError("layer cap for layer " + std::to_string(layer) +
                              " must lie in [0, 1]");
      }
    }
  });
  collect("path", [&] { path.validate(); });
  collect("grids", [&] {
    if (!(grids.t_step > 0.0)) throw ValidationError("t_step must be positive");
    if (!(grids.t_hi > grids.t_lo)) throw ValidationError("t_hi must be > t_lo");
    for (double s : grids.sparsity_levels) {
      if (!(s >= 0.0 && s < 1.0)) {
        throw ValidationError("sparsity level " + format_f64(s) + " outside [0, 1)");
      }
    }
    for (double f : grids.zero_fractions) {
      if (!(f >= 0.0 && f < 1.0)) {
        throw ValidationError("zero fraction " + format_f64(f) + " outside [0, 1)");
      }
    }
  });
  collect("out_dir", [&] {
    if (out_dir.empty()) throw ValidationError("out_dir must be non-empty");
  });
  if (!problems.empty()) {
    std::string msg = "config invalid (" + std::to_string(problems.size()) + " problems):";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: JSON parse error: ") + e.what());
  }
  ExperimentConfig c;
  try {
    if (j.contains("task")) parse_task(j.at("task"), c.task);
    if (j.contains("architecture")) parse_arch(j.at("architecture"), c.arch);
    if (j.contains("train")) parse_train(j.at("train"), c.train);
    if (j.contains("prune")) parse_prune(j.at("prune"), c);
    if (j.contains("path")) parse_path(j.at("path"), c.path);
    if (j.contains("grids")) parse_grids(j.at("grids"), c.grids);
    get_if(j, "out_dir", c.out_dir);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  try {
    return parse_config(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::string config_json(const ExperimentConfig& config) {
  json j;
  j["task"] = task_json(config.task);
  j["architecture"]["layer_sizes"] = config.arch.layer_sizes;
  {
    std::vector<bool> bn;
    for (uint8_t b : config.arch.use_batchnorm) bn.push_back(b != 0);
    j["architecture"]["batchnorm"] = bn;
  }
  j["train"]["total_steps"] = config.train.total_steps;
  j["train"]["batch_size"] = config.train.batch_size;
  j["train"]["base_lr"] = config.train.lr.base_lr;
  j["train"]["warmup_steps"] = config.train.lr.warmup_steps;
  j["train"]["drop_steps"] = config.train.lr.drop_steps;
  j["train"]["drop_factor"] = config.train.lr.drop_factor;
  j["train"]["momentum"] = config.train.momentum;
  j["train"]["weight_decay"] = config.train.weight_decay;
  j["train"]["seed"] = config.train.seed;
  j["train"]["eval_every"] = config.train.eval_every;
  j["train"]["l2_scope"] = config.train.l2_scope == L2Scope::WeightsOnly ? "weights_only" : "all";
  j["prune"]["start_step"] = config.prune.start_step;
  j["prune"]["end_step"] = config.prune.end_step;
  j["prune"]["frequency"] = config.prune.frequency;
  j["prune"]["initial_sparsity"] = config.prune.initial_sparsity;
  j["prune"]["final_sparsity"] = config.prune.final_sparsity;
  j["prune"]["exponent"] = config.prune.exponent;
  j["prune"]["skip_first_layer"] = config.exclusions.skip_first_layer;
  j["prune"]["monotone"] = config.prune_monotone;
  {
    json caps = json::object();
    for (const auto& [layer, cap] : config.exclusions.layer_caps) {
      caps[std::to_string(layer)] = cap;
    }
    j["prune"]["layer_caps"] = caps;
  }
  j["prune"]["scope"] = config.mask_scope == MaskScope::PerLayer ? "per_layer" : "global";
  j["path"]["steps"] = config.path.steps;
  j["path"]["batch_size"] = config.path.batch_size;
  j["path"]["base_lr"] = config.path.base_lr;
  j["path"]["momentum"] = config.path.momentum;
  j["path"]["weight_decay"] = config.path.weight_decay;
  j["path"]["seed"] = config.path.seed;
  j["grids"]["t_lo"] = config.grids.t_lo;
  j["grids"]["t_hi"] = config.grids.t_hi;
  j["grids"]["t_step"] = config.grids.t_step;
  j["grids"]["sparsity_levels"] = config.grids.sparsity_levels;
  j["grids"]["zero_fractions"] = config.grids.zero_fractions;
  j["out_dir"] = config.out_dir;
  return j.dump(2);  // nlohmann::json orders keys lexicographically
}

uint64_t config_hash(const ExperimentConfig& config) {
  std::string canonical = config_json(config);
  Fnv1a64 h;
  h.update(canonical.data(), canonical.size());
  return h.digest();
}

}  // namespace sllb
