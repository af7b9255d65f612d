#pragma once

#include <span>
#include <vector>

namespace dds {

// Numerically stable softmax; output sums to 1.
std::vector<double> softmax(std::span<const double> logits);

struct CrossEntropyResult {
  double loss;       // -log softmax(logits)[label], >= 0
  double prob_true;  // softmax(logits)[label]
};

// Throws NumericError on non-finite logits, ConfigError on bad label.
CrossEntropyResult cross_entropy(std::span<const double> logits, size_t label);

// d(cross_entropy)/d(logits) = softmax(logits) - onehot(label)
std::vector<double> cross_entropy_grad(std::span<const double> logits,
                                       size_t label);

// Sum of squared differences (the reconstruction term of the contractive
// objective) and mean squared error (the reconstruction term of the
// triplet-combined objective).
double sum_sq_error(std::span<const double> x, std::span<const double> xhat);
double mean_sq_error(std::span<const double> x, std::span<const double> xhat);

// ||x - xhat||^2 + lambda * ||J||_F^2, jacobian flattened row-major N x D.
double contractive_loss(std::span<const double> x,
                        std::span<const double> reconstruction,
                        std::span<const double> encoder_jacobian,
                        double lambda);

// max(0, d(a,p) - d(a,n) + margin) with Euclidean d.
double triplet_margin_loss(std::span<const double> anchor,
                           std::span<const double> positive,
                           std::span<const double> negative, double margin);

struct TripletGrads {
  double loss;
  std::vector<double> d_anchor, d_positive, d_negative;
};
TripletGrads triplet_margin_loss_grads(std::span<const double> anchor,
                                       std::span<const double> positive,
                                       std::span<const double> negative,
                                       double margin);

// Log-variance homoscedastic-uncertainty weights for the two task losses.
struct KendallWeights {
  double s1 = 0.0;
  double s2 = 0.0;
};

// exp(-s1)*l_triplet + s1/2 + exp(-s2)*l_mse + s2/2
double kendall_combined_loss(double l_triplet, double l_mse,
                             const KendallWeights& w);

struct KendallGrads {
  double loss;
  double d_l_triplet, d_l_mse;  // task-loss weights exp(-s)
  double d_s1, d_s2;
};
KendallGrads kendall_combined_loss_grads(double l_triplet, double l_mse,
                                         const KendallWeights& w);

}  // namespace dds
