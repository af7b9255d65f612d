#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dds/common.hpp"
#include "dds/layers.hpp"
#include "dds/losses.hpp"
#include "dds/optim.hpp"
#include "testutil.hpp"

using namespace dds;
using testutil::fd_gradient;
using testutil::max_rel_err;
using testutil::random_vec;

TEST_CASE("forward_dense identity and constant maps") {
  Tensor x({2}, {1.0, 2.0});
  Tensor eye({2, 2}, {1, 0, 0, 1});
  Tensor zero_b({2}, {0, 0});
  auto y = forward_dense(x, eye, zero_b);
  CHECK(y.data[0] == 1.0);
  CHECK(y.data[1] == 2.0);

  Tensor zeros({3, 2}, std::vector<double>(6, 0.0));
  Tensor b({3}, {3.0, 3.0, 3.0});
  auto z = forward_dense(x, zeros, b);
  for (double v : z.data) CHECK(v == 3.0);
}

TEST_CASE("forward_dense random case matches hand-rolled matrix product") {
  std::mt19937_64 rng(7);
  auto wv = random_vec(rng, 12);
  auto xv = random_vec(rng, 3);
  auto bv = random_vec(rng, 4);
  Tensor w({4, 3}, wv), x({3}, xv), b({4}, bv);
  auto y = forward_dense(x, w, b);
  for (size_t o = 0; o < 4; ++o) {
    double acc = bv[o];
    for (size_t i = 0; i < 3; ++i) acc += wv[o * 3 + i] * xv[i];
    CHECK(y.data[o] == doctest::Approx(acc).epsilon(1e-14));
  }
}

TEST_CASE("forward_dense rejects shape mismatch") {
  Tensor x({3}, {1, 2, 3});
  Tensor w({2, 2}, {1, 0, 0, 1});
  Tensor b({2}, {0, 0});
  CHECK_THROWS_AS(forward_dense(x, w, b), ConfigError);
}

TEST_CASE("cross_entropy uniform, saturated, and frozen-oracle values") {
  std::vector<double> uniform(10, 0.7);
  auto r = cross_entropy(uniform, 3);
  CHECK(r.loss == doctest::Approx(2.302585092994046).epsilon(1e-12));
  CHECK(r.prob_true == doctest::Approx(0.1).epsilon(1e-12));

  std::vector<double> hot(10, 0.0);
  hot[2] = 1000.0;
  auto s = cross_entropy(hot, 2);
  CHECK(s.loss == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(s.prob_true == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<double> two = {1.0, 2.0};
  auto t = cross_entropy(two, 0);
  CHECK(t.loss == doctest::Approx(1.3132616875182228).epsilon(1e-14));
  CHECK(t.prob_true == doctest::Approx(0.2689414213699951).epsilon(1e-14));
}

TEST_CASE("cross_entropy errors") {
  std::vector<double> bad = {1.0, std::nan("")};
  CHECK_THROWS_AS(cross_entropy(bad, 0), NumericError);
  std::vector<double> ok = {1.0, 2.0};
  CHECK_THROWS_AS(cross_entropy(ok, 5), ConfigError);
}

TEST_CASE("softmax sums to one and cross_entropy is non-negative") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto logits = random_vec(rng, 2 + trial % 12, -30.0, 30.0);
    auto p = softmax(logits);
    double sum = 0.0;
    for (double v : p) sum += v;
    CHECK(std::abs(sum - 1.0) < 1e-12);
    auto r = cross_entropy(logits, trial % logits.size());
    CHECK(r.loss >= 0.0);
  }
}

TEST_CASE("adam zero gradient with zero decay is a fixed point") {
  AdamConfig cfg;
  cfg.weight_decay = 0.0;
  AdamState st(3, cfg);
  std::vector<double> p = {1.0, -2.0, 0.5};
  std::vector<double> g = {0.0, 0.0, 0.0};
  auto before = p;
  st.step(p, g, "p");
  CHECK(p == before);
  CHECK(st.steps_taken() == 1);
}

TEST_CASE("adam single and double step match hand-computed recurrence") {
  AdamConfig cfg;
  cfg.lr = 3e-4;
  cfg.beta1 = 0.5;
  cfg.beta2 = 0.999;
  cfg.weight_decay = 0.0;
  AdamState st(1, cfg);
  std::vector<double> p = {1.0};
  std::vector<double> g = {1.0};
  st.step(p, g, "p");
  // frozen from the Adam recurrence evaluated in extended precision
  CHECK(p[0] == doctest::Approx(0.9997000000030000).epsilon(1e-15));
  st.step(p, g, "p");
  CHECK(p[0] == doctest::Approx(0.9994000000060000).epsilon(1e-15));
}

TEST_CASE("adam bias correction matches symbolic expansion over two steps") {
  // independent symbolic recurrence for constant gradient g
  const double b1 = 0.5, b2 = 0.999, lr = 3e-4, eps = 1e-8, g = 0.37;
  double m = 0, v = 0, expected = -1.4;
  std::vector<double> p = {-1.4}, gr = {g};
  AdamConfig cfg;
  cfg.lr = lr;
  cfg.beta1 = b1;
  cfg.beta2 = b2;
  cfg.weight_decay = 0.0;
  AdamState st(1, cfg);
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    expected -= lr * mhat / (std::sqrt(vhat) + eps);
    st.step(p, gr, "p");
    CHECK(p[0] == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("adam rejects NaN gradients with parameter identifier") {
  AdamState st(1, {});
  std::vector<double> p = {1.0};
  std::vector<double> g = {std::nan("")};
  CHECK_THROWS_WITH_AS(st.step(p, g, "alpha"),
                       doctest::Contains("alpha"), NumericError);
}

TEST_CASE("sgd momentum trivial cases") {
  SgdConfig cfg;
  cfg.lr = 0.1;
  cfg.momentum = 0.0;
  cfg.weight_decay = 0.0;
  SgdMomentumState st(2, cfg);
  std::vector<double> p = {1.0, 2.0};
  std::vector<double> g = {0.0, 0.0};
  auto before = p;
  st.step(p, g, "p");
  CHECK(p == before);

  // momentum 0 reduces to vanilla SGD exactly
  g = {0.5, -0.25};
  st.step(p, g, "p");
  CHECK(p[0] == 1.0 - 0.1 * 0.5);
  CHECK(p[1] == 2.0 + 0.1 * 0.25);
}

TEST_CASE("sgd momentum over three constant-gradient steps matches geometric series") {
  SgdConfig cfg;
  cfg.lr = 0.1;
  cfg.momentum = 0.9;
  cfg.weight_decay = 0.0;
  SgdMomentumState st(1, cfg);
  std::vector<double> p = {5.0};
  std::vector<double> g = {2.0};
  for (int i = 0; i < 3; ++i) st.step(p, g, "p");
  // p3 = p0 - lr*g*(3 + 2*mu + mu^2) = 5 - 0.1*2*5.61
  CHECK(p[0] == doctest::Approx(3.878).epsilon(1e-14));
}

TEST_CASE("optimizer steps are deterministic given identical state") {
  std::mt19937_64 rng(3);
  auto g = random_vec(rng, 16);
  auto p0 = random_vec(rng, 16);
  for (int kind = 0; kind < 2; ++kind) {
    auto pa = p0, pb = p0;
    if (kind == 0) {
      AdamState a(16, {}), b(16, {});
      a.step(pa, g, "p");
      b.step(pb, g, "p");
    } else {
      SgdMomentumState a(16, {}), b(16, {});
      a.step(pa, g, "p");
      b.step(pb, g, "p");
    }
    CHECK(pa == pb);
  }
}

TEST_CASE("cyclic lr endpoints and midpoint") {
  CyclicLrSchedule s;
  CHECK(s.lr() == doctest::Approx(0.001).epsilon(1e-15));
  s.current_step = 10;
  CHECK(s.lr() == doctest::Approx(0.01).epsilon(1e-15));
  s.current_step = 5;
  CHECK(s.lr() == doctest::Approx(0.0055).epsilon(1e-15));
}

TEST_CASE("cyclic lr never leaves [base, max]") {
  CyclicLrSchedule s;
  for (int i = 0; i < 500; ++i) {
    const double lr = s.lr();
    CHECK(lr >= s.base_lr - 1e-18);
    CHECK(lr <= s.max_lr + 1e-18);
    s.advance();
  }
}

TEST_CASE("reset_to_max repositions at the peak and is idempotent") {
  CyclicLrSchedule s;
  s.current_step = 37;
  s.reset_to_max();
  CHECK(s.lr() == doctest::Approx(0.01).epsilon(1e-15));
  s.reset_to_max();
  CHECK(s.lr() == doctest::Approx(0.01).epsilon(1e-15));
  // decay resumes down the descending arm back to base after 10 steps
  for (int i = 0; i < 10; ++i) s.advance();
  CHECK(s.lr() == doctest::Approx(0.001).epsilon(1e-15));
}

TEST_CASE("cyclic lr validates configuration") {
  CyclicLrSchedule s;
  s.base_lr = 0.02;  // >= max
  CHECK_THROWS_AS(s.lr(), ConfigError);
}

TEST_CASE("cosine schedule anneals max to min") {
  CosineLrSchedule s;
  s.lr_max = 0.1;
  s.lr_min = 0.0;
  s.period = 10;
  CHECK(s.lr() == doctest::Approx(0.1));
  s.current_step = 10;
  CHECK(s.lr() == doctest::Approx(0.0));
  s.current_step = 5;
  CHECK(s.lr() == doctest::Approx(0.05));
  s.current_step = 25;  // held at min past the period
  CHECK(s.lr() == doctest::Approx(0.0));
}

// ---------------------------------------------------------------------------
// gradient checks

namespace {

// Loss of a stack against a fixed target through sum-of-squares; exercises
// forward+backward of every layer in the stack.
double stack_loss(Stack& s, std::span<const double> x,
                  std::span<const double> target) {
  std::vector<double> y(s.out_dim());
  s.infer(x, y);
  double acc = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - target[i];
    acc += d * d;
  }
  return acc;
}

void check_stack_gradients(Stack& s, std::mt19937_64& rng, double tol) {
  const auto x = random_vec(rng, s.in_dim());
  const auto target = random_vec(rng, s.out_dim());

  s.zero_grads();
  auto y = s.forward(x);
  std::vector<double> gy(y.size());
  for (size_t i = 0; i < y.size(); ++i) gy[i] = 2.0 * (y[i] - target[i]);
  s.backward(gy);

  std::vector<double> analytic;
  for (auto g : s.grad_views())
    analytic.insert(analytic.end(), g.begin(), g.end());

  std::vector<double> fd;
  for (auto p : s.param_views()) {
    auto part = fd_gradient(p, [&] { return stack_loss(s, x, target); });
    fd.insert(fd.end(), part.begin(), part.end());
  }
  CHECK(max_rel_err(analytic, fd) < tol);
}

}  // namespace

TEST_CASE("dense and tanh layers pass central finite-difference checks") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<size_t> dims = {2 + trial % 5, 3 + trial % 4, 2 + trial % 3};
    Stack s = make_mlp(dims, Act::tanh, rng);
    check_stack_gradients(s, rng, 1e-6);
  }
}

TEST_CASE("relu stack passes finite-difference checks away from kinks") {
  std::mt19937_64 rng(77);
  int done = 0;
  while (done < 100) {
    Stack s = make_mlp({4, 6, 3}, Act::relu, rng);
    const auto x = random_vec(rng, 4);
    // skip draws with a pre-activation too close to a kink
    std::vector<double> h(6);
    s.layer(0).infer(x, h);
    bool near_kink = false;
    for (double z : h) near_kink |= std::abs(z) < 1e-3;
    if (near_kink) continue;
    const auto target = random_vec(rng, 3);
    s.zero_grads();
    auto y = s.forward(x);
    std::vector<double> gy(y.size());
    for (size_t i = 0; i < y.size(); ++i) gy[i] = 2.0 * (y[i] - target[i]);
    s.backward(gy);
    std::vector<double> analytic;
    for (auto g : s.grad_views())
      analytic.insert(analytic.end(), g.begin(), g.end());
    std::vector<double> fd;
    for (auto p : s.param_views()) {
      auto part = fd_gradient(p, [&] { return stack_loss(s, x, target); });
      fd.insert(fd.end(), part.begin(), part.end());
    }
    CHECK(max_rel_err(analytic, fd) < 1e-5);
    ++done;
  }
}

TEST_CASE("conv3x3 layer passes finite-difference checks") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t h = 3 + trial % 3, w = 3 + trial % 4;
    Stack s;
    auto conv = std::make_unique<Conv3x3Layer>(h, w);
    conv->init(rng);
    s.add(std::move(conv));
    s.add(std::make_unique<ActivationLayer>(Act::tanh, h * w));
    check_stack_gradients(s, rng, 1e-6);
  }
}

TEST_CASE("backward input adjoint matches finite differences on the input") {
  std::mt19937_64 rng(91);
  Stack s = make_mlp({5, 7, 4}, Act::tanh, rng);
  auto x = random_vec(rng, 5);
  const auto target = random_vec(rng, 4);
  s.zero_grads();
  auto y = s.forward(x);
  std::vector<double> gy(y.size());
  for (size_t i = 0; i < y.size(); ++i) gy[i] = 2.0 * (y[i] - target[i]);
  auto gx = s.backward(gy);
  auto fd = fd_gradient(x, [&] { return stack_loss(s, x, target); });
  CHECK(max_rel_err(gx, fd) < 1e-6);
}
