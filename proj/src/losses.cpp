#include "fairclust/losses.hpp"

#include <cmath>
#include <string>

#include "fairclust/errors.hpp"

namespace fairclust {

namespace {

constexpr double kProbFloor = 1e-12;

double clamped_log(double p) { return std::log(std::max(p, kProbFloor)); }

void check_rows_match(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DomainError("probability matrices have mismatched shapes");
}

}  // namespace

void LossWeights::validate() const {
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0)
    throw ConfigError("loss weights must be non-negative");
  if (vat_epsilon <= 0.0) throw ConfigError("vat_epsilon must be positive");
  if (vat_xi <= 0.0) throw ConfigError("vat_xi must be positive");
  if (vat_power_iters < 1) throw ConfigError("vat_power_iters must be at least 1");
}

double clustering_loss(const Matrix& probs, const Network& net, double alpha) {
  if (probs.rows() < 1) throw DomainError("clustering loss needs a non-empty batch");
  const double n = static_cast<double>(probs.rows());
  double conditional = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) conditional += entropy(probs.row(i));
  conditional /= n;
  const Eigen::RowVectorXd marginal = probs.colwise().mean();
  return conditional - entropy(marginal) + alpha * l2_penalty(net);
}

double clustering_loss_grad(const Matrix& probs, Matrix& d_logits) {
  if (probs.rows() < 1) throw DomainError("clustering loss needs a non-empty batch");
  const double n = static_cast<double>(probs.rows());
  const Eigen::RowVectorXd marginal = probs.colwise().mean();

  double conditional = 0.0;
  Matrix d_probs(probs.rows(), probs.cols());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    conditional += entropy(probs.row(i));
    for (Eigen::Index j = 0; j < probs.cols(); ++j)
      d_probs(i, j) = (clamped_log(marginal(j)) - clamped_log(probs(i, j))) / n;
  }
  conditional /= n;
  d_logits = softmax_backward(probs, d_probs);
  return conditional - entropy(marginal);
}

double l2_penalty(const Network& net) {
  double sum = 0.0;
  for (const auto& layer : net.layers)
    sum += layer.weight.squaredNorm() + layer.bias.squaredNorm();
  return sum;
}

void add_l2_gradient(const Network& net, double alpha, Gradients& grads) {
  if (alpha == 0.0) return;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    grads.layers[l].weight += 2.0 * alpha * net.layers[l].weight;
    grads.layers[l].bias += 2.0 * alpha * net.layers[l].bias;
  }
}

double fairness_loss(const Matrix& probs, const HardAssignment& fair) {
  if (static_cast<Eigen::Index>(fair.labels.size()) != probs.rows())
    throw DomainError("pseudo-label count does not match batch rows");
  const double n = static_cast<double>(probs.rows());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const int label = fair.labels[static_cast<std::size_t>(i)];
    if (label < 0 || label >= probs.cols())
      throw DomainError("pseudo-label out of range at row " + std::to_string(i));
    loss -= clamped_log(probs(i, label));
  }
  return loss / n;
}

double fairness_loss_grad(const Matrix& probs, const std::vector<int>& labels,
                          Matrix& d_logits, double scale) {
  if (static_cast<Eigen::Index>(labels.size()) != probs.rows())
    throw DomainError("pseudo-label count does not match batch rows");
  const double n = static_cast<double>(probs.rows());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    loss -= clamped_log(probs(i, label));
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      const double indicator = (j == label) ? 1.0 : 0.0;
      d_logits(i, j) += scale * (probs(i, j) - indicator) / n;
    }
  }
  return loss / n;
}

double augmentation_loss(const Matrix& probs, const Matrix& probs_perturbed) {
  check_rows_match(probs, probs_perturbed);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i)
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      const double p = probs(i, j);
      if (p > 0.0) loss += p * (clamped_log(p) - clamped_log(probs_perturbed(i, j)));
    }
  return std::max(loss, 0.0);
}

double augmentation_loss_grad(const Matrix& probs, const Matrix& probs_perturbed,
                              Matrix& d_logits, double scale) {
  check_rows_match(probs, probs_perturbed);
  // d KL(p || q) / d logits(q) = q - p, summed over the batch.
  d_logits += scale * (probs_perturbed - probs);
  return augmentation_loss(probs, probs_perturbed);
}

Vector vat_perturbation(const Network& net, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                        const LossWeights& cfg, std::uint64_t seed) {
  Matrix batch(1, x.size());
  batch.row(0) = x;
  const Matrix t = vat_perturbation_batch(net, batch, cfg, seed);
  return t.row(0).transpose();
}

Matrix vat_perturbation_batch(const Network& net, const Matrix& batch,
                              const LossWeights& cfg, std::uint64_t seed) {
  cfg.validate();
  const Eigen::Index n = batch.rows();
  const Eigen::Index dim = batch.cols();

  Matrix direction(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng(Rng::mix(seed, 0x7A7D, static_cast<std::uint64_t>(i)));
    double norm2 = 0.0;
    for (Eigen::Index c = 0; c < dim; ++c) {
      direction(i, c) = rng.normal();
      norm2 += direction(i, c) * direction(i, c);
    }
    if (norm2 <= 0.0) {
      direction.row(i).setZero();
      direction(i, 0) = 1.0;
    } else {
      direction.row(i) /= std::sqrt(norm2);
    }
  }

  const Matrix clean = forward(net, batch);
  for (int iter = 0; iter < cfg.vat_power_iters; ++iter) {
    const ForwardCache cache = forward_cached(net, batch + cfg.vat_xi * direction);
    const Matrix d_logits = cache.probs - clean;
    Matrix d_input;
    backward(net, cache, d_logits, nullptr, 1.0, &d_input);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = d_input.row(i).norm();
      // Flat divergence: keep the seeded direction.
      if (norm > 1e-30) direction.row(i) = d_input.row(i) / norm;
    }
  }
  return cfg.vat_epsilon * direction;
}

double total_loss(const Matrix& probs, const Matrix& probs_perturbed,
                  const HardAssignment& fair, const Network& net,
                  const LossWeights& weights) {
  weights.validate();
  double loss = clustering_loss(probs, net, weights.alpha);
  if (weights.beta != 0.0) loss += weights.beta * fairness_loss(probs, fair);
  if (weights.gamma != 0.0)
    loss += weights.gamma * augmentation_loss(probs, probs_perturbed);
  return loss;
}

}  // namespace fairclust
