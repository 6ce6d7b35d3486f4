#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairclust/data.hpp"
#include "fairclust/fair_assign.hpp"
#include "fairclust/losses.hpp"
#include "fairclust/metrics.hpp"
#include "fairclust/net.hpp"

namespace fairclust {

struct TrainConfig {
  int k = 4;
  int pretrain_epochs = 20;
  int max_refine_epochs = 100;
  int batch_size = 256;
  std::uint64_t seed = 7;
  LossWeights weights;
  std::optional<double> fairness_relax;
  double stop_tolerance = 0.01;
  bool shuffle = true;
  std::vector<int> hidden = {256, 256};
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  /// Returns a list of problems, empty when valid.
  std::vector<std::string> problems() const;
  void validate() const;  // throws ConfigError listing every problem
};

struct EpochRecord {
  std::string phase;  // "pretrain" or "refine"
  int epoch = 0;      // global index, shared across phases
  double loss = 0.0;
  double loss_clustering = 0.0;
  double loss_fairness = 0.0;
  double loss_augmentation = 0.0;
  MetricsReport metrics;
  double assign_objective = std::numeric_limits<double>::quiet_NaN();
};

struct TrainTrace {
  std::vector<EpochRecord> epochs;
};

/// True iff the assignment's overall balance reaches (1 - delta) times the
/// best attainable value |G_min| / |G_max|.
bool stopping_check(const HardAssignment& assign, const GroupMembership& membership,
                    double delta);

struct Predictions {
  HardAssignment hard;
  Matrix soft;
};

struct TrainResult {
  Network model;
  TrainTrace trace;
  Matrix final_soft;
  HardAssignment final_predictions;
  FairAssignResult final_fair;      // solved against the final predictions
  MetricsReport final_metrics;      // of the model predictions
  MetricsReport final_fair_metrics; // of the solved fair assignment
  bool stopped_on_fairness = false;
  int pretrain_epochs_run = 0;
  int refine_epochs_run = 0;
};

/// Runs the two training phases against a dataset whose features are already
/// on the scale the perturbation radius assumes. Owns model and optimizer
/// state across both phases; every random draw derives from the config seed,
/// keyed by the global epoch index, so a run is bitwise reproducible and a
/// refine phase with beta = gamma = 0 continues pretraining exactly.
class Trainer {
 public:
  Trainer(Matrix features, GroupMembership membership,
          std::optional<std::vector<int>> truth, TrainConfig cfg);

  TrainTrace pretrain();
  /// Per epoch: full-dataset predictions, one exact fair-assignment solve,
  /// then minibatch updates against the epoch's pseudo-labels. Ends on
  /// stopping_check or after max_refine_epochs.
  TrainTrace refine();

  Predictions predict(const Matrix& features) const;
  /// Penultimate-layer activations for external visualization.
  Matrix embeddings(const Matrix& features) const;

  const Network& model() const { return model_; }
  const GroupMembership& membership() const { return membership_; }
  bool stopped_on_fairness() const { return stopped_on_fairness_; }
  int global_epoch() const { return global_epoch_; }

  TrainResult finish();

 private:
  struct BatchStats {
    double loss = 0.0, clustering = 0.0, fairness = 0.0, augmentation = 0.0;
  };

  std::vector<std::vector<int>> make_batches(int global_epoch) const;
  BatchStats train_batch(const std::vector<int>& rows, const std::vector<int>* pseudo,
                         bool use_fairness, int global_epoch, int batch_index);
  MetricsReport evaluate_full(const Matrix& soft, int epoch) const;

  Matrix features_;
  GroupMembership membership_;
  std::optional<std::vector<int>> truth_;
  TrainConfig cfg_;
  Network model_;
  AdamState optimizer_;
  TrainTrace trace_;
  int global_epoch_ = 0;
  bool stopped_on_fairness_ = false;
  int pretrain_epochs_run_ = 0;
  int refine_epochs_run_ = 0;
};

/// pretrain + refine in one call.
TrainResult train(const Dataset& dataset, const TrainConfig& cfg);

}  // namespace fairclust
