#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "polarfront/adam.hpp"
#include "polarfront/dataset.hpp"
#include "polarfront/model.hpp"

namespace polarfront {

/// One stage of the three-stage plan. The only accepted combinations are
///   1: B1 regularizer, front end trainable, quantizer off
///   2: B2 regularizer, front end trainable, quantizer off
///   3: no regularizer, front end frozen, quantizer on
/// anything else raises ConfigError before any training happens.
struct StageSpec {
  int index = 1;
  int epochs = 20;
  bool regularized = true;
  BumpVariant bump = BumpVariant::B1;
  double sigma = 0.35;
  bool freeze_frontend = false;
  bool quantize = false;

  void validate() const;
};

struct TrainingSchedule {
  std::string dataset = "mnist";
  int frontend_filters = 32;
  int frontend_kernel = 5;
  double threshold_c = 0.5;  // quantizer threshold; 0.5 mnist, 0.3 fashion
  std::vector<StageSpec> stages;
  ClassifierConfig classifier;  // in_channels must equal frontend_filters
  AdamConfig adam;
  int batch_size = 128;
  std::uint64_t seed = 1;

  void validate() const;
};

/// sigma 0.35 / 0.15 for stages 1 / 2, threshold 0.5 (mnist) or 0.3
/// (fashion), 5 epochs per stage at desk scale, 20 with full=true.
TrainingSchedule default_schedule(const std::string& dataset, bool full);

struct EpochLog {
  int stage = 0;
  int epoch = 0;        // 1-based within the stage
  double lambda = 0.0;  // exactly epoch / total_epochs
  double cross_entropy = 0.0;
  double penalty = 0.0;    // lambda * mean_bump
  double mean_bump = 0.0;  // mean of B(z) over every activation seen this epoch
  double total = 0.0;
};

void write_curve_csv(const std::vector<EpochLog>& curve, const std::string& path);

/// Adam updates per batch on cross-entropy + lambda * mean bump, lambda
/// ramping linearly to 1 over the stage. Mutates the model in place and sets
/// its mode/frozen flags from the stage. epochs=0 leaves every parameter
/// untouched and returns an empty curve.
std::vector<EpochLog> run_stage(DefendedModel& m, const Dataset& train,
                                const StageSpec& stage, int batch_size,
                                AdamState& adam, std::uint64_t seed,
                                std::ostream* log = nullptr);

struct TrainResult {
  DefendedModel model;
  std::vector<EpochLog> curve;
  std::vector<std::string> checkpoints;  // stage1..stage3 paths when out_dir given
};

/// Runs the stages in order with a fresh Adam state per stage (the loss
/// surface changes discontinuously at the boundaries). When out_dir is
/// nonempty a checkpoint is written after each stage.
TrainResult train_full(const Dataset& train, const TrainingSchedule& sched,
                       const std::string& out_dir = "",
                       std::ostream* log = nullptr);

/// Undefended twin: the same classifier architecture reading raw pixels,
/// trained with plain cross-entropy in a single stage.
PlainModel train_plain(const Dataset& train, int epochs, int batch_size,
                       const AdamConfig& adam_cfg, std::uint64_t seed,
                       std::vector<EpochLog>* curve = nullptr,
                       std::ostream* log = nullptr);

}  // namespace polarfront
