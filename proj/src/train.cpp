#include "fairclust/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairclust/errors.hpp"

namespace fairclust {

namespace {
constexpr std::uint64_t kShuffleTag = 0x5F0FF1E;
constexpr std::uint64_t kVatTag = 0x7AD7;
}  // namespace

std::vector<std::string> TrainConfig::problems() const {
  std::vector<std::string> out;
  if (k < 2) out.push_back("k must be at least 2");
  if (batch_size < 2) out.push_back("batch_size must be at least 2");
  if (pretrain_epochs < 0) out.push_back("pretrain_epochs must be non-negative");
  if (max_refine_epochs < 0) out.push_back("max_refine_epochs must be non-negative");
  if (stop_tolerance < 0.0 || stop_tolerance >= 1.0)
    out.push_back("stop_tolerance must lie in [0, 1)");
  if (learning_rate <= 0.0) out.push_back("learning_rate must be positive");
  if (adam_beta1 < 0.0 || adam_beta1 >= 1.0) out.push_back("adam_beta1 must lie in [0, 1)");
  if (adam_beta2 < 0.0 || adam_beta2 >= 1.0) out.push_back("adam_beta2 must lie in [0, 1)");
  if (adam_epsilon <= 0.0) out.push_back("adam_epsilon must be positive");
  for (int h : hidden)
    if (h < 1) {
      out.push_back("hidden widths must be positive");
      break;
    }
  if (weights.alpha < 0.0) out.push_back("alpha must be non-negative");
  if (weights.beta < 0.0) out.push_back("beta must be non-negative");
  if (weights.gamma < 0.0) out.push_back("gamma must be non-negative");
  if (weights.vat_epsilon <= 0.0) out.push_back("vat_epsilon must be positive");
  if (weights.vat_xi <= 0.0) out.push_back("vat_xi must be positive");
  if (weights.vat_power_iters < 1) out.push_back("vat_power_iters must be at least 1");
  if (fairness_relax && (*fairness_relax < 0.0 || *fairness_relax >= 1.0))
    out.push_back("fairness_relax must lie in [0, 1)");
  return out;
}

void TrainConfig::validate() const {
  const auto list = problems();
  if (list.empty()) return;
  std::string message = "invalid configuration: ";
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i > 0) message += "; ";
    message += list[i];
  }
  throw ConfigError(message);
}

bool stopping_check(const HardAssignment& assign, const GroupMembership& membership,
                    double delta) {
  if (delta < 0.0 || delta >= 1.0) throw DomainError("delta must lie in [0, 1)");
  const auto sizes = membership.group_sizes();
  std::int64_t lo = sizes[0], hi = sizes[0];
  for (std::int64_t s : sizes) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  const double optimum = (hi > 0) ? static_cast<double>(lo) / static_cast<double>(hi) : 0.0;
  return balance(assign, membership).overall >= (1.0 - delta) * optimum;
}

Trainer::Trainer(Matrix features, GroupMembership membership,
                 std::optional<std::vector<int>> truth, TrainConfig cfg)
    : features_(std::move(features)),
      membership_(std::move(membership)),
      truth_(std::move(truth)),
      cfg_(std::move(cfg)) {
  cfg_.validate();
  membership_.validate();
  if (features_.rows() != membership_.size())
    throw ConfigError("features and membership row counts differ");
  if (features_.rows() < cfg_.k)
    throw ConfigError("need at least k instances");
  if (truth_ && static_cast<Eigen::Index>(truth_->size()) != features_.rows())
    throw ConfigError("ground-truth label count does not match features");
  if (!features_.allFinite()) throw NumericError("features contain non-finite values");
  model_ = Network::make(static_cast<int>(features_.cols()), cfg_.hidden, cfg_.k, cfg_.seed);
  optimizer_ = AdamState::init(model_, cfg_.learning_rate, cfg_.adam_beta1, cfg_.adam_beta2,
                               cfg_.adam_epsilon);
}

std::vector<std::vector<int>> Trainer::make_batches(int global_epoch) const {
  const int n = static_cast<int>(features_.rows());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (cfg_.shuffle) {
    Rng rng(Rng::mix(cfg_.seed, kShuffleTag, static_cast<std::uint64_t>(global_epoch)));
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.below(i));
      std::swap(order[i - 1], order[j]);
    }
  }
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < n; start += cfg_.batch_size) {
    const int end = std::min(n, start + cfg_.batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  // A one-row tail is merged into the previous batch.
  if (batches.size() > 1 && batches.back().size() < 2) {
    batches[batches.size() - 2].push_back(batches.back()[0]);
    batches.pop_back();
  }
  return batches;
}

Trainer::BatchStats Trainer::train_batch(const std::vector<int>& rows,
                                         const std::vector<int>* pseudo, bool use_fairness,
                                         int global_epoch, int batch_index) {
  const auto b = static_cast<Eigen::Index>(rows.size());
  Matrix batch(b, features_.cols());
  for (Eigen::Index i = 0; i < b; ++i)
    batch.row(i) = features_.row(rows[static_cast<std::size_t>(i)]);

  const ForwardCache cache = forward_cached(model_, batch);
  Matrix d_logits;
  BatchStats stats;
  stats.clustering = clustering_loss_grad(cache.probs, d_logits) +
                     cfg_.weights.alpha * l2_penalty(model_);

  if (pseudo != nullptr) {
    std::vector<int> labels(static_cast<std::size_t>(b));
    for (Eigen::Index i = 0; i < b; ++i)
      labels[static_cast<std::size_t>(i)] = (*pseudo)[static_cast<std::size_t>(
          rows[static_cast<std::size_t>(i)])];
    if (use_fairness && cfg_.weights.beta != 0.0) {
      stats.fairness = fairness_loss_grad(cache.probs, labels, d_logits, cfg_.weights.beta);
    } else {
      HardAssignment fair{labels, cfg_.k};
      stats.fairness = fairness_loss(cache.probs, fair);
    }
  }

  Gradients grads = Gradients::zeros_like(model_);
  backward(model_, cache, d_logits, &grads);

  if (cfg_.weights.gamma != 0.0) {
    const std::uint64_t vat_seed = Rng::mix(cfg_.seed, kVatTag,
                                            static_cast<std::uint64_t>(global_epoch),
                                            static_cast<std::uint64_t>(batch_index));
    const Matrix perturbation = vat_perturbation_batch(model_, batch, cfg_.weights, vat_seed);
    const ForwardCache perturbed = forward_cached(model_, batch + perturbation);
    Matrix d_logits_perturbed = Matrix::Zero(b, cfg_.k);
    // Weighted per instance, like the other two terms, so gamma does not
    // scale with the batch size.
    stats.augmentation =
        augmentation_loss_grad(cache.probs, perturbed.probs, d_logits_perturbed,
                               cfg_.weights.gamma / static_cast<double>(b)) /
        static_cast<double>(b);
    backward(model_, perturbed, d_logits_perturbed, &grads);
  }

  add_l2_gradient(model_, cfg_.weights.alpha, grads);

  stats.loss = stats.clustering + cfg_.weights.beta * stats.fairness +
               cfg_.weights.gamma * stats.augmentation;
  if (!std::isfinite(stats.loss) || !grads.all_finite())
    throw NumericError("non-finite loss at epoch " + std::to_string(global_epoch) +
                       " batch " + std::to_string(batch_index) + " (clustering=" +
                       std::to_string(stats.clustering) + ", fairness=" +
                       std::to_string(stats.fairness) + ", augmentation=" +
                       std::to_string(stats.augmentation) + ")");

  optimizer_.step(model_, grads);
  return stats;
}

MetricsReport Trainer::evaluate_full(const Matrix& soft, int epoch) const {
  const HardAssignment hard = round_assignment(soft);
  return evaluate(hard, membership_, truth_ ? &*truth_ : nullptr, epoch);
}

TrainTrace Trainer::pretrain() {
  TrainTrace phase_trace;
  for (int e = 0; e < cfg_.pretrain_epochs; ++e) {
    const int global = global_epoch_++;
    const auto batches = make_batches(global);
    BatchStats sum;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const BatchStats s = train_batch(batches[b], nullptr, false, global, static_cast<int>(b));
      sum.loss += s.loss;
      sum.clustering += s.clustering;
      sum.augmentation += s.augmentation;
    }
    const auto count = static_cast<double>(batches.size());
    EpochRecord record;
    record.phase = "pretrain";
    record.epoch = global;
    record.loss = sum.loss / count;
    record.loss_clustering = sum.clustering / count;
    record.loss_augmentation = sum.augmentation / count;
    record.metrics = evaluate_full(forward(model_, features_), global);
    phase_trace.epochs.push_back(record);
    trace_.epochs.push_back(record);
    ++pretrain_epochs_run_;
  }
  return phase_trace;
}

TrainTrace Trainer::refine() {
  TrainTrace phase_trace;
  Matrix soft = forward(model_, features_);
  for (int e = 0; e < cfg_.max_refine_epochs; ++e) {
    const int global = global_epoch_++;
    FairAssignResult fair;
    try {
      fair = solve_fair_assignment(soft, membership_, cfg_.fairness_relax);
    } catch (const InfeasibleError& err) {
      throw InfeasibleError("refine epoch " + std::to_string(global) + ": " + err.what());
    }
    if (!fair.plan.satisfied_by(fair.assignment, membership_))
      throw NumericError("refine epoch " + std::to_string(global) +
                         ": fair assignment violates its quota plan");

    const auto batches = make_batches(global);
    BatchStats sum;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const BatchStats s = train_batch(batches[b], &fair.assignment.labels, true, global,
                                       static_cast<int>(b));
      sum.loss += s.loss;
      sum.clustering += s.clustering;
      sum.fairness += s.fairness;
      sum.augmentation += s.augmentation;
    }

    soft = forward(model_, features_);
    const auto count = static_cast<double>(batches.size());
    EpochRecord record;
    record.phase = "refine";
    record.epoch = global;
    record.loss = sum.loss / count;
    record.loss_clustering = sum.clustering / count;
    record.loss_fairness = sum.fairness / count;
    record.loss_augmentation = sum.augmentation / count;
    record.assign_objective = fair.objective;
    record.metrics = evaluate_full(soft, global);
    phase_trace.epochs.push_back(record);
    trace_.epochs.push_back(record);
    ++refine_epochs_run_;

    if (stopping_check(round_assignment(soft), membership_, cfg_.stop_tolerance)) {
      stopped_on_fairness_ = true;
      break;
    }
  }
  return phase_trace;
}

Predictions Trainer::predict(const Matrix& features) const {
  Predictions out;
  out.soft = forward(model_, features);
  out.hard = round_assignment(out.soft);
  return out;
}

Matrix Trainer::embeddings(const Matrix& features) const {
  if (model_.layers.size() < 2) return features;
  const ForwardCache cache = forward_cached(model_, features);
  return cache.post[cache.post.size() - 2];
}

TrainResult Trainer::finish() {
  TrainResult result;
  result.model = model_;
  result.trace = trace_;
  result.final_soft = forward(model_, features_);
  result.final_predictions = round_assignment(result.final_soft);
  result.final_fair = solve_fair_assignment(result.final_soft, membership_, cfg_.fairness_relax);
  result.final_metrics = evaluate(result.final_predictions, membership_,
                                  truth_ ? &*truth_ : nullptr, global_epoch_ - 1);
  result.final_fair_metrics = evaluate(result.final_fair.assignment, membership_,
                                       truth_ ? &*truth_ : nullptr, global_epoch_ - 1);
  result.stopped_on_fairness = stopped_on_fairness_;
  result.pretrain_epochs_run = pretrain_epochs_run_;
  result.refine_epochs_run = refine_epochs_run_;
  return result;
}

TrainResult train(const Dataset& dataset, const TrainConfig& cfg) {
  if (!dataset.membership) throw ConfigError("training requires protected-group membership");
  Trainer trainer(dataset.features, *dataset.membership, dataset.labels, cfg);
  trainer.pretrain();
  trainer.refine();
  return trainer.finish();
}

}  // namespace fairclust
