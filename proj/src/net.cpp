#include "fairclust/net.hpp"

#include <cmath>
#include <string>

#include "fairclust/errors.hpp"

namespace fairclust {

namespace {
constexpr double kProbFloor = 1e-12;
}

std::uint64_t Rng::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = ~0ULL - ~0ULL % n;
  std::uint64_t v = next();
  while (v >= limit) v = next();
  return v % n;
}

std::uint64_t Rng::mix(std::uint64_t seed, std::uint64_t purpose, std::uint64_t a,
                       std::uint64_t b) {
  Rng r(seed ^ (purpose * 0xd1342543de82ef95ULL));
  r.next();
  std::uint64_t h = r.next() ^ (a * 0xff51afd7ed558ccdULL);
  h ^= (b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  Rng r2(h);
  return r2.next();
}

int Network::input_dim() const {
  return layers.empty() ? 0 : static_cast<int>(layers.front().weight.rows());
}

int Network::output_dim() const {
  return layers.empty() ? 0 : static_cast<int>(layers.back().weight.cols());
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers)
    n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

void Network::validate() const {
  if (layers.empty()) throw ConfigError("network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.weight.cols())
      throw ConfigError("layer " + std::to_string(l) + " bias size mismatch");
    if (l > 0 && layers[l - 1].weight.cols() != layer.weight.rows())
      throw ConfigError("layer " + std::to_string(l) + " input dim mismatch");
    if (!layer.weight.allFinite() || !layer.bias.allFinite())
      throw NumericError("layer " + std::to_string(l) + " has non-finite parameters");
  }
  if (output_dim() < 2) throw ConfigError("output dimension must be at least 2");
}

Network Network::make(int input_dim, const std::vector<int>& hidden, int output_dim,
                      std::uint64_t seed) {
  if (input_dim < 1) throw ConfigError("input dimension must be positive");
  if (output_dim < 2) throw ConfigError("output dimension must be at least 2");
  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden width must be positive");
    dims.push_back(h);
  }
  dims.push_back(output_dim);

  Network net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Rng rng(Rng::mix(seed, 0x1A7E5, l));
    DenseLayer layer;
    layer.weight.resize(dims[l], dims[l + 1]);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        layer.weight(r, c) = rng.uniform(-scale, scale);
    layer.bias = Vector::Zero(dims[l + 1]);
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

Gradients Gradients::zeros_like(const Network& net) {
  Gradients g;
  for (const auto& layer : net.layers)
    g.layers.push_back(DenseLayer{Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                                  Vector::Zero(layer.bias.size())});
  return g;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
  if (other.layers.size() != layers.size()) throw ConfigError("gradient shape mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].weight += scale * other.layers[l].weight;
    layers[l].bias += scale * other.layers[l].bias;
  }
}

bool Gradients::all_finite() const {
  for (const auto& layer : layers)
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  return true;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double max = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      probs(i, j) = std::exp(logits(i, j) - max);
      sum += probs(i, j);
    }
    probs.row(i) /= sum;
  }
  return probs;
}

double entropy(const Eigen::Ref<const Eigen::RowVectorXd>& p) {
  double sum = 0.0;
  double h = 0.0;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double v = p(j);
    if (v < 0.0) throw DomainError("entropy input has a negative entry");
    sum += v;
    if (v > 0.0) h -= v * std::log(std::max(v, kProbFloor));
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw DomainError("entropy input sums to " + std::to_string(sum));
  return h;
}

ForwardCache forward_cached(const Network& net, const Matrix& batch) {
  if (static_cast<int>(batch.cols()) != net.input_dim())
    throw ConfigError("batch has " + std::to_string(batch.cols()) +
                      " columns, network expects " + std::to_string(net.input_dim()));
  ForwardCache cache;
  cache.input = batch;
  Matrix current = batch;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Matrix pre = (current * net.layers[l].weight).rowwise() +
                 net.layers[l].bias.transpose();
    Matrix post = (l + 1 == net.layers.size()) ? pre : pre.cwiseMax(0.0);
    cache.pre.push_back(pre);
    cache.post.push_back(post);
    current = post;
  }
  cache.probs = softmax_rows(cache.post.back());
  return cache;
}

Matrix forward(const Network& net, const Matrix& batch) {
  return forward_cached(net, batch).probs;
}

Matrix softmax_backward(const Matrix& probs, const Matrix& d_probs) {
  Matrix d_logits(probs.rows(), probs.cols());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const double dot = probs.row(i).dot(d_probs.row(i));
    d_logits.row(i) =
        probs.row(i).cwiseProduct(d_probs.row(i) - Eigen::RowVectorXd::Constant(probs.cols(), dot));
  }
  return d_logits;
}

void backward(const Network& net, const ForwardCache& cache, const Matrix& d_logits,
              Gradients* grads, double scale, Matrix* d_input) {
  if (grads != nullptr && grads->layers.size() != net.layers.size())
    throw ConfigError("gradient holder does not match network");
  Matrix delta = d_logits;
  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const bool last = l + 1 == static_cast<int>(net.layers.size());
    if (!last) {
      // ReLU gate: pre-activation <= 0 kills the gradient.
      const Matrix& pre = cache.pre[static_cast<std::size_t>(l)];
      delta = delta.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
    }
    const Matrix& input =
        (l == 0) ? cache.input : cache.post[static_cast<std::size_t>(l - 1)];
    if (grads != nullptr) {
      grads->layers[static_cast<std::size_t>(l)].weight +=
          scale * (input.transpose() * delta);
      grads->layers[static_cast<std::size_t>(l)].bias +=
          scale * delta.colwise().sum().transpose();
    }
    if (l > 0 || d_input != nullptr)
      delta = delta * net.layers[static_cast<std::size_t>(l)].weight.transpose();
  }
  if (d_input != nullptr) *d_input = scale * delta;
}

AdamState AdamState::init(const Network& net, double learning_rate, double beta1,
                          double beta2, double epsilon) {
  AdamState state;
  state.learning_rate = learning_rate;
  state.beta1 = beta1;
  state.beta2 = beta2;
  state.epsilon = epsilon;
  for (const auto& layer : net.layers) {
    state.first_moment.push_back(DenseLayer{
        Matrix::Zero(layer.weight.rows(), layer.weight.cols()), Vector::Zero(layer.bias.size())});
    state.second_moment.push_back(DenseLayer{
        Matrix::Zero(layer.weight.rows(), layer.weight.cols()), Vector::Zero(layer.bias.size())});
  }
  return state;
}

void AdamState::step(Network& net, const Gradients& grads) {
  if (grads.layers.size() != net.layers.size() ||
      first_moment.size() != net.layers.size())
    throw ConfigError("optimizer state does not match network");
  ++step_count;
  const double correction1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double correction2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& m = first_moment[l];
    auto& v = second_moment[l];
    const auto& g = grads.layers[l];
    m.weight = beta1 * m.weight + (1.0 - beta1) * g.weight;
    m.bias = beta1 * m.bias + (1.0 - beta1) * g.bias;
    v.weight = beta2 * v.weight + (1.0 - beta2) * g.weight.cwiseProduct(g.weight);
    v.bias = beta2 * v.bias + (1.0 - beta2) * g.bias.cwiseProduct(g.bias);
    net.layers[l].weight.array() -=
        learning_rate * (m.weight.array() / correction1) /
        ((v.weight.array() / correction2).sqrt() + epsilon);
    net.layers[l].bias.array() -=
        learning_rate * (m.bias.array() / correction1) /
        ((v.bias.array() / correction2).sqrt() + epsilon);
  }
}

}  // namespace fairclust
