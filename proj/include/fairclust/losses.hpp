#pragma once

#include <cstdint>

#include "fairclust/fair_assign.hpp"
#include "fairclust/net.hpp"

namespace fairclust {

/// Weights and perturbation settings for the combined objective
/// total = clustering + beta * fairness + gamma * augmentation.
struct LossWeights {
  double alpha = 1e-4;       // L2 penalty on all parameters
  double beta = 4.0;         // pseudo-label cross-entropy weight
  double gamma = 1.0;        // perturbation-consistency weight
  double vat_epsilon = 1.0;  // perturbation radius (L2)
  double vat_xi = 10.0;      // finite-difference probe scale
  int vat_power_iters = 1;

  void validate() const;
};

/// Mean conditional entropy minus marginal entropy of the batch prediction
/// average, plus alpha * sum of squared parameters.
double clustering_loss(const Matrix& probs, const Network& net, double alpha);

/// d(entropy terms)/d(logits); returns the entropy part of the loss value.
/// The alpha * ||theta||^2 term is handled by add_l2_gradient.
double clustering_loss_grad(const Matrix& probs, Matrix& d_logits);

double l2_penalty(const Network& net);
void add_l2_gradient(const Network& net, double alpha, Gradients& grads);

/// Cross entropy -(1/n) sum_i ln p_i[label_i] against pseudo-labels.
double fairness_loss(const Matrix& probs, const HardAssignment& fair);

/// Adds d(fairness)/d(logits) * scale into d_logits; returns the loss value.
double fairness_loss_grad(const Matrix& probs, const std::vector<int>& labels,
                          Matrix& d_logits, double scale);

/// sum_i KL(p_i || q_i), the first argument treated as a constant target.
double augmentation_loss(const Matrix& probs, const Matrix& probs_perturbed);

/// d(augmentation)/d(perturbed logits) * scale into d_logits; returns value.
double augmentation_loss_grad(const Matrix& probs, const Matrix& probs_perturbed,
                              Matrix& d_logits, double scale);

/// Adversarial direction by power iteration: from a seeded random unit
/// vector d, repeat vat_power_iters times
///   d <- normalize( grad_d KL(p(x) || p(x + xi * d)) )
/// and return vat_epsilon * d. The clean prediction p(x) is a constant. A
/// vanishing gradient keeps the seeded direction, so the result always has
/// norm exactly vat_epsilon.
Vector vat_perturbation(const Network& net, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                        const LossWeights& cfg, std::uint64_t seed);

/// Row-wise batch variant; row i uses the stream (seed, i).
Matrix vat_perturbation_batch(const Network& net, const Matrix& batch,
                              const LossWeights& cfg, std::uint64_t seed);

/// clustering + beta * fairness + gamma * augmentation, by value.
double total_loss(const Matrix& probs, const Matrix& probs_perturbed,
                  const HardAssignment& fair, const Network& net, const LossWeights& weights);

}  // namespace fairclust
