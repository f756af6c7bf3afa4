#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sllb/architecture.hpp"
#include "sllb/bezier.hpp"
#include "sllb/dataset.hpp"
#include "sllb/schedule.hpp"
#include "sllb/train.hpp"

namespace sllb {

// Task supply: either a synthetic generator spec or a pair of IDX files.
struct TaskSpec {
  SyntheticKind kind = SyntheticKind::Spirals;
  int64_t n = 2000;
  double noise = 0.1;
  uint64_t seed = 7;
  std::string idx_images, idx_labels;  // when non-empty, IDX ingestion wins

  bool from_idx() const { return !idx_images.empty(); }
  Dataset load() const;
};

struct GridSpec {
  double t_lo = -0.2, t_hi = 1.2, t_step = 0.01;
  std::vector<double> sparsity_levels{0.8, 0.91, 0.96, 0.98};
  std::vector<double> zero_fractions{0.0, 0.5, 0.8, 0.9, 0.95, 0.99, 0.999};
};

struct ExperimentConfig {
  TaskSpec task;
  Architecture arch{{2, 64, 64, 3}, {0, 0}};
  TrainConfig train;
  PruningSchedule prune{600, 2400, 200, 0.0, 0.9, 3.0};
  PruneExclusions exclusions;
  MaskScope mask_scope = MaskScope::PerLayer;
  bool prune_monotone = true;
  PathOptConfig path;
  GridSpec grids;
  std::string out_dir = "runs";

  // Collects every violated field into one error message.
  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_json(const ExperimentConfig& config);  // canonical (sorted keys)

// FNV-1a over the canonical JSON dump; key order in the source never matters.
uint64_t config_hash(const ExperimentConfig& config);

}  // namespace sllb
