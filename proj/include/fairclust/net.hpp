#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace fairclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Deterministic 64-bit stream (splitmix64). Used everywhere randomness is
/// needed so results do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller.
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Derives an independent stream keyed by (purpose, a, b).
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t purpose, std::uint64_t a = 0,
                           std::uint64_t b = 0);

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Dense layer applied as rows(out) = rows(in) * weight + bias^T.
struct DenseLayer {
  Matrix weight;  // fan_in x fan_out
  Vector bias;    // fan_out
};

/// Fully connected network with ReLU hidden layers and a linear output head;
/// predictions are the row-wise softmax of the final layer.
struct Network {
  std::vector<DenseLayer> layers;

  int input_dim() const;
  int output_dim() const;
  std::size_t parameter_count() const;
  void validate() const;  // dimension chaining, finiteness, output_dim >= 2

  /// Uniform fan-in initialization, biases zero, weights U(-s, s) with
  /// s = 1/sqrt(fan_in), drawn from a seeded stream.
  static Network make(int input_dim, const std::vector<int>& hidden, int output_dim,
                      std::uint64_t seed);
};

/// Gradients with the same shapes as the network parameters.
struct Gradients {
  std::vector<DenseLayer> layers;

  static Gradients zeros_like(const Network& net);
  void add_scaled(const Gradients& other, double scale);
  bool all_finite() const;
};

/// Activations recorded by a forward pass, enough to backpropagate.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // pre-activation per layer
  std::vector<Matrix> post;  // post-activation per layer; back() = logits
  Matrix probs;
};

/// Row-wise softmax with max-subtraction, so shifting a row's logits by a
/// constant leaves the output bitwise unchanged.
Matrix softmax_rows(const Matrix& logits);

/// -sum p ln p with 0 ln 0 := 0 and probabilities clamped at 1e-12 inside
/// the log. Throws DomainError on negative entries or a row sum far from 1.
double entropy(const Eigen::Ref<const Eigen::RowVectorXd>& p);

ForwardCache forward_cached(const Network& net, const Matrix& batch);
Matrix forward(const Network& net, const Matrix& batch);

/// Backpropagates d(loss)/d(logits) through the recorded pass. Accumulates
/// parameter gradients into `grads` (scaled by `scale`); optionally returns
/// the gradient with respect to the input batch.
void backward(const Network& net, const ForwardCache& cache, const Matrix& d_logits,
              Gradients* grads, double scale = 1.0, Matrix* d_input = nullptr);

/// Maps d(loss)/d(probs) to d(loss)/d(logits) for row-stochastic probs.
Matrix softmax_backward(const Matrix& probs, const Matrix& d_probs);

/// Adam with bias correction; moments stored per parameter tensor.
struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step_count = 0;
  std::vector<DenseLayer> first_moment;
  std::vector<DenseLayer> second_moment;

  static AdamState init(const Network& net, double learning_rate, double beta1 = 0.9,
                        double beta2 = 0.999, double epsilon = 1e-8);
  void step(Network& net, const Gradients& grads);
};

}  // namespace fairclust
