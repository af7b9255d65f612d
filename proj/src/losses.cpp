#include "dds/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dds/common.hpp"

namespace dds {

std::vector<double> softmax(std::span<const double> logits) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logits) m = std::max(m, v);
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

CrossEntropyResult cross_entropy(std::span<const double> logits, size_t label) {
  if (label >= logits.size())
    throw ConfigError("cross_entropy: label " + std::to_string(label) +
                      " out of range for " + std::to_string(logits.size()) +
                      " classes");
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logits) {
    if (!std::isfinite(v)) throw NumericError("cross_entropy: non-finite logit");
    m = std::max(m, v);
  }
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  const double lse = m + std::log(z);
  const double loss = lse - logits[label];
  return {std::max(loss, 0.0), std::exp(logits[label] - lse)};
}

std::vector<double> cross_entropy_grad(std::span<const double> logits,
                                       size_t label) {
  std::vector<double> g = softmax(logits);
  g[label] -= 1.0;
  return g;
}

double sum_sq_error(std::span<const double> x, std::span<const double> xhat) {
  if (x.size() != xhat.size())
    throw ConfigError("sum_sq_error: size mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - xhat[i];
    acc += d * d;
  }
  return acc;
}

double mean_sq_error(std::span<const double> x, std::span<const double> xhat) {
  return sum_sq_error(x, xhat) / static_cast<double>(x.size());
}

double contractive_loss(std::span<const double> x,
                        std::span<const double> reconstruction,
                        std::span<const double> encoder_jacobian,
                        double lambda) {
  double frob = 0.0;
  for (double j : encoder_jacobian) frob += j * j;
  const double loss = sum_sq_error(x, reconstruction) + lambda * frob;
  if (!std::isfinite(loss))
    throw NumericError("contractive_loss: non-finite value");
  return loss;
}

namespace {
double euclid(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}
}  // namespace

double triplet_margin_loss(std::span<const double> anchor,
                           std::span<const double> positive,
                           std::span<const double> negative, double margin) {
  if (anchor.size() != positive.size() || anchor.size() != negative.size())
    throw ConfigError("triplet_margin_loss: dimension mismatch");
  return std::max(0.0, euclid(anchor, positive) - euclid(anchor, negative) +
                           margin);
}

TripletGrads triplet_margin_loss_grads(std::span<const double> anchor,
                                       std::span<const double> positive,
                                       std::span<const double> negative,
                                       double margin) {
  const size_t n = anchor.size();
  TripletGrads out;
  out.d_anchor.assign(n, 0.0);
  out.d_positive.assign(n, 0.0);
  out.d_negative.assign(n, 0.0);
  const double dp = euclid(anchor, positive);
  const double dn = euclid(anchor, negative);
  out.loss = std::max(0.0, dp - dn + margin);
  if (out.loss <= 0.0) return out;
  constexpr double kEps = 1e-12;  // guard the sqrt derivative at zero distance
  for (size_t i = 0; i < n; ++i) {
    const double gp = (anchor[i] - positive[i]) / std::max(dp, kEps);
    const double gn = (anchor[i] - negative[i]) / std::max(dn, kEps);
    out.d_anchor[i] = gp - gn;
    out.d_positive[i] = -gp;
    out.d_negative[i] = gn;
  }
  return out;
}

double kendall_combined_loss(double l_triplet, double l_mse,
                             const KendallWeights& w) {
  return std::exp(-w.s1) * l_triplet + 0.5 * w.s1 +
         std::exp(-w.s2) * l_mse + 0.5 * w.s2;
}

KendallGrads kendall_combined_loss_grads(double l_triplet, double l_mse,
                                         const KendallWeights& w) {
  KendallGrads g;
  const double w1 = std::exp(-w.s1);
  const double w2 = std::exp(-w.s2);
  g.loss = w1 * l_triplet + 0.5 * w.s1 + w2 * l_mse + 0.5 * w.s2;
  g.d_l_triplet = w1;
  g.d_l_mse = w2;
  g.d_s1 = -w1 * l_triplet + 0.5;
  g.d_s2 = -w2 * l_mse + 0.5;
  return g;
}

}  // namespace dds
