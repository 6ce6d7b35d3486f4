#include <doctest.h>

#include <cmath>
#include <vector>

#include "fairclust/errors.hpp"
#include "fairclust/net.hpp"

using namespace fairclust;

namespace {

Network zero_network(int input, int hidden, int output) {
  Network net;
  net.layers.push_back({Matrix::Zero(input, hidden), Vector::Zero(hidden)});
  net.layers.push_back({Matrix::Zero(hidden, output), Vector::Zero(output)});
  return net;
}

}  // namespace

TEST_CASE("zero network predicts the uniform distribution") {
  const Network net = zero_network(3, 5, 4);
  Matrix batch(2, 3);
  batch << 1.0, -2.0, 0.5, 0.0, 0.0, 9.0;
  const Matrix probs = forward(net, batch);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j) CHECK(probs(i, j) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("softmax of equal logits splits evenly") {
  Matrix logits(1, 2);
  logits << 0.0, 0.0;
  const Matrix probs = softmax_rows(logits);
  CHECK(probs(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(probs(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("softmax rows sum to one and shifting logits changes nothing") {
  Rng rng(3);
  Matrix logits(8, 5);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 5; ++j) logits(i, j) = rng.uniform(-30.0, 30.0);
  const Matrix probs = softmax_rows(logits);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(probs.row(i).sum() - 1.0) <= 1e-9);

  Matrix shifted = logits;
  for (int i = 0; i < 8; ++i) shifted.row(i).array() += rng.uniform(-100.0, 100.0);
  const Matrix probs2 = softmax_rows(shifted);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 5; ++j) CHECK(std::abs(probs(i, j) - probs2(i, j)) <= 1e-9);
}

TEST_CASE("seeded forward pass matches a naive matrix-arithmetic oracle") {
  const Network net = Network::make(2, {3}, 2, 1234);
  Matrix batch(3, 2);
  batch << 0.5, -1.0, 2.0, 0.25, -0.75, 1.5;
  const Matrix probs = forward(net, batch);

  // Straightforward per-element recomputation, no shared code path.
  for (int i = 0; i < 3; ++i) {
    std::vector<double> h(3, 0.0);
    for (int j = 0; j < 3; ++j) {
      double sum = net.layers[0].bias(j);
      for (int c = 0; c < 2; ++c) sum += batch(i, c) * net.layers[0].weight(c, j);
      h[static_cast<std::size_t>(j)] = sum > 0.0 ? sum : 0.0;
    }
    std::vector<double> z(2, 0.0);
    for (int j = 0; j < 2; ++j) {
      double sum = net.layers[1].bias(j);
      for (int c = 0; c < 3; ++c) sum += h[static_cast<std::size_t>(c)] * net.layers[1].weight(c, j);
      z[static_cast<std::size_t>(j)] = sum;
    }
    const double m = std::max(z[0], z[1]);
    const double e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m);
    CHECK(probs(i, 0) == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-12));
    CHECK(probs(i, 1) == doctest::Approx(e1 / (e0 + e1)).epsilon(1e-12));
    CHECK(probs.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("forward is deterministic and rejects bad dimensions") {
  const Network net = Network::make(4, {8}, 3, 9);
  const Network net2 = Network::make(4, {8}, 3, 9);
  Rng rng(11);
  Matrix batch(5, 4);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) batch(i, j) = rng.normal();
  const Matrix a = forward(net, batch);
  const Matrix b = forward(net2, batch);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) CHECK(a(i, j) == b(i, j));

  Matrix bad(2, 3);
  bad.setZero();
  CHECK_THROWS_AS(forward(net, bad), ConfigError);
}

TEST_CASE("entropy values") {
  Eigen::RowVectorXd uniform = Eigen::RowVectorXd::Constant(10, 0.1);
  CHECK(entropy(uniform) == doctest::Approx(std::log(10.0)).epsilon(1e-12));

  Eigen::RowVectorXd one_hot(4);
  one_hot << 0, 0, 1, 0;
  CHECK(entropy(one_hot) == doctest::Approx(0.0));

  Eigen::RowVectorXd skewed(2);
  skewed << 0.25, 0.75;
  CHECK(entropy(skewed) == doctest::Approx(0.5623351446188083).epsilon(1e-12));

  Eigen::RowVectorXd negative(2);
  negative << -0.1, 1.1;
  CHECK_THROWS_AS(entropy(negative), DomainError);
}

TEST_CASE("backward: constant loss gives zero gradients") {
  const Network net = Network::make(3, {4}, 2, 5);
  Matrix batch(2, 3);
  batch.setRandom();
  const ForwardCache cache = forward_cached(net, batch);
  Gradients grads = Gradients::zeros_like(net);
  backward(net, cache, Matrix::Zero(2, 2), &grads);
  for (const auto& layer : grads.layers) {
    CHECK(layer.weight.cwiseAbs().maxCoeff() == 0.0);
    CHECK(layer.bias.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("backward matches central differences on a quadratic logit loss") {
  Network net = Network::make(2, {4}, 3, 77);
  Matrix batch(3, 2);
  batch << 0.2, -0.4, 1.0, 0.3, -0.9, 0.8;

  auto loss_value = [&](const Network& model) {
    const ForwardCache cache = forward_cached(model, batch);
    return 0.5 * cache.post.back().squaredNorm();
  };

  const ForwardCache cache = forward_cached(net, batch);
  Gradients grads = Gradients::zeros_like(net);
  backward(net, cache, cache.post.back(), &grads);

  Rng rng(31337);
  const double h = 1e-5;
  for (int probe = 0; probe < 20; ++probe) {
    const auto layer = static_cast<std::size_t>(rng.below(net.layers.size()));
    auto& weight = net.layers[layer].weight;
    const auto r = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(weight.rows())));
    const auto c = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(weight.cols())));
    const double saved = weight(r, c);
    weight(r, c) = saved + h;
    const double up = loss_value(net);
    weight(r, c) = saved - h;
    const double down = loss_value(net);
    weight(r, c) = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = grads.layers[layer].weight(r, c);
    CHECK(std::abs(numeric - analytic) <= 1e-4 * std::max({1.0, std::abs(numeric), std::abs(analytic)}));
  }
}

TEST_CASE("adam: zero gradient leaves parameters untouched") {
  Network net = Network::make(2, {}, 2, 1);
  const Matrix saved = net.layers[0].weight;
  AdamState opt = AdamState::init(net, 1e-3);
  opt.step(net, Gradients::zeros_like(net));
  CHECK(opt.step_count == 1);
  CHECK((net.layers[0].weight - saved).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam: bias-corrected first step moves by about the learning rate") {
  Network net = Network::make(1, {}, 2, 1);
  const double before = net.layers[0].weight(0, 0);
  const double untouched = net.layers[0].weight(0, 1);
  AdamState opt = AdamState::init(net, 1e-3);
  Gradients grads = Gradients::zeros_like(net);
  grads.layers[0].weight(0, 0) = 1.0;
  opt.step(net, grads);
  CHECK(net.layers[0].weight(0, 0) == doctest::Approx(before - 1e-3).epsilon(1e-6));
  CHECK(net.layers[0].weight(0, 1) == untouched);  // zero-gradient entry
}

TEST_CASE("adam: 100 steps on x^2 converge below 0.5 and match the scalar recurrence") {
  Network net = Network::make(1, {}, 2, 1);
  net.layers[0].weight(0, 0) = 1.0;
  AdamState opt = AdamState::init(net, 0.01);

  // Independent scalar recurrence.
  double x = 1.0, m = 0.0, v = 0.0;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.01;
  for (int t = 1; t <= 100; ++t) {
    const double g = 2.0 * x;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    x -= lr * (m / (1.0 - std::pow(b1, t))) / (std::sqrt(v / (1.0 - std::pow(b2, t))) + eps);

    Gradients grads = Gradients::zeros_like(net);
    grads.layers[0].weight(0, 0) = 2.0 * net.layers[0].weight(0, 0);
    opt.step(net, grads);
  }
  CHECK(std::abs(net.layers[0].weight(0, 0)) < 0.5);
  CHECK(net.layers[0].weight(0, 0) == doctest::Approx(x).epsilon(1e-9));
}

TEST_CASE("network construction validates shapes") {
  CHECK_THROWS_AS(Network::make(0, {4}, 2, 1), ConfigError);
  CHECK_THROWS_AS(Network::make(2, {4}, 1, 1), ConfigError);
  CHECK_THROWS_AS(Network::make(2, {0}, 2, 1), ConfigError);
}
