#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dds/tensor.hpp"

namespace dds {

// y = W x + b with W row-major (out x in). Throws ConfigError on dimension
// mismatch. The workhorse behind DenseLayer; also used directly by tests.
Tensor forward_dense(const Tensor& input, const Tensor& weights,
                     const Tensor& bias);

// Layers process one sample at a time. forward() caches what backward()
// needs; infer() is the const, cache-free path for frozen models.
//
// The tangent pair propagates directional derivatives w.r.t. the *input* of
// the most recent forward() call: tangent() computes J_layer * tx, and
// tangent_backward() reverse-accumulates an objective's adjoint on the
// tangent output into parameter grads, the tangent-input adjoint gtx, and
// (for layers whose Jacobian depends on the primal input) the primal-input
// adjoint gx. This is what makes training with a Jacobian-norm penalty
// possible without a general autodiff graph.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual size_t in_dim() const = 0;
  virtual size_t out_dim() const = 0;
  virtual std::string name() const = 0;

  virtual void forward(std::span<const double> x, std::span<double> y) = 0;
  virtual void infer(std::span<const double> x, std::span<double> y) const = 0;
  // gy: adjoint of output; gx: adjoint of input (overwritten).
  virtual void backward(std::span<const double> gy, std::span<double> gx) = 0;

  virtual void tangent(std::span<const double> tx,
                       std::span<double> ty) const = 0;
  virtual void tangent_backward(std::span<const double> tx,
                                std::span<const double> gty,
                                std::span<double> gtx,
                                std::span<double> gx_accum) = 0;

  virtual std::span<double> params() { return {}; }
  virtual std::span<double> grads() { return {}; }
  void zero_grads() {
    for (double& g : grads()) g = 0.0;
  }
};

class DenseLayer : public Layer {
 public:
  DenseLayer(size_t in, size_t out);

  size_t in_dim() const override { return in_; }
  size_t out_dim() const override { return out_; }
  std::string name() const override { return "dense"; }

  void forward(std::span<const double> x, std::span<double> y) override;
  void infer(std::span<const double> x, std::span<double> y) const override;
  void backward(std::span<const double> gy, std::span<double> gx) override;
  void tangent(std::span<const double> tx, std::span<double> ty) const override;
  void tangent_backward(std::span<const double> tx, std::span<const double> gty,
                        std::span<double> gtx,
                        std::span<double> gx_accum) override;

  std::span<double> params() override { return params_; }
  std::span<double> grads() override { return grads_; }

  // params layout: W (out*in) then b (out)
  double* weight() { return params_.data(); }
  double* bias() { return params_.data() + in_ * out_; }
  const double* weight() const { return params_.data(); }
  const double* bias() const { return params_.data() + in_ * out_; }

  void init(std::mt19937_64& rng, double scale = 0.0);

 private:
  size_t in_, out_;
  std::vector<double> params_, grads_;
  std::vector<double> last_x_;
};

enum class Act { relu, tanh, sigmoid };

class ActivationLayer : public Layer {
 public:
  ActivationLayer(Act kind, size_t dim) : kind_(kind), dim_(dim) {}

  size_t in_dim() const override { return dim_; }
  size_t out_dim() const override { return dim_; }
  std::string name() const override;

  void forward(std::span<const double> x, std::span<double> y) override;
  void infer(std::span<const double> x, std::span<double> y) const override;
  void backward(std::span<const double> gy, std::span<double> gx) override;
  void tangent(std::span<const double> tx, std::span<double> ty) const override;
  void tangent_backward(std::span<const double> tx, std::span<const double> gty,
                        std::span<double> gtx,
                        std::span<double> gx_accum) override;

 private:
  double act(double z) const;
  double dact(double z) const;
  double ddact(double z) const;  // second derivative, used by tangent_backward

  Act kind_;
  size_t dim_;
  std::vector<double> last_z_;
};

// 3x3 stride-1 zero-padded convolution on a single-channel h x w image,
// flattened row-major. One kernel, one bias.
class Conv3x3Layer : public Layer {
 public:
  Conv3x3Layer(size_t h, size_t w);

  size_t in_dim() const override { return h_ * w_; }
  size_t out_dim() const override { return h_ * w_; }
  std::string name() const override { return "conv3x3"; }

  void forward(std::span<const double> x, std::span<double> y) override;
  void infer(std::span<const double> x, std::span<double> y) const override;
  void backward(std::span<const double> gy, std::span<double> gx) override;
  void tangent(std::span<const double> tx, std::span<double> ty) const override;
  void tangent_backward(std::span<const double> tx, std::span<const double> gty,
                        std::span<double> gtx,
                        std::span<double> gx_accum) override;

  std::span<double> params() override { return params_; }
  std::span<double> grads() override { return grads_; }

  void init(std::mt19937_64& rng, double scale = 0.0);

 private:
  void conv(const double* x, const double* k, double bias, double* y) const;
  // adds correlation of gy against x into gk
  void kernel_grad(const double* gy, const double* x, double* gk) const;
  void input_grad(const double* gy, const double* k, double* gx) const;

  size_t h_, w_;
  std::vector<double> params_, grads_;  // k (9) then b (1)
  std::vector<double> last_x_;
};

// Sequential container. Owns its layers; keeps per-boundary activation
// buffers so backward can run without the caller tracking shapes.
class Stack {
 public:
  Stack() = default;

  void add(std::unique_ptr<Layer> layer);

  size_t in_dim() const;
  size_t out_dim() const;
  size_t layer_count() const { return layers_.size(); }
  Layer& layer(size_t i) { return *layers_[i]; }
  const Layer& layer(size_t i) const { return *layers_[i]; }

  // forward with caching; returns reference to the output buffer
  std::span<const double> forward(std::span<const double> x);
  void infer(std::span<const double> x, std::span<double> y) const;
  // gy: adjoint of the stack output; returns adjoint of the stack input
  std::vector<double> backward(std::span<const double> gy);

  // Tangent propagation through the linearization at the last forward().
  // Caches per-boundary tangents for tangent_backward.
  std::span<const double> tangent_forward(std::span<const double> tx);
  // Reverse pass for an objective on the tangent output of the most recent
  // tangent_forward. Accumulates parameter grads from the tangent path and
  // collects the induced primal adjoints per boundary; callers propagate one
  // tangent column at a time and then call flush_tangent_adjoints once.
  void tangent_backward(std::span<const double> gty);
  // Pushes the primal adjoints accumulated by tangent_backward calls since
  // the last forward() back through the layers (accumulating parameter
  // grads) and returns the resulting adjoint on the stack input.
  std::vector<double> flush_tangent_adjoints();

  std::vector<std::span<double>> param_views();
  std::vector<std::span<double>> grad_views();
  void zero_grads();

  size_t param_count() const;
  // flattened copies, used by serialization and tests
  std::vector<double> flat_params() const;
  void set_flat_params(std::span<const double> p);

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
  std::vector<std::vector<double>> acts_;   // acts_[i] = input to layer i; back = output
  std::vector<std::vector<double>> tangs_;  // same layout for tangents
  std::vector<std::vector<double>> ga_accum_;  // per-boundary primal adjoints
};

// Builder for a dense multi-layer perceptron: dims.front() inputs,
// dims.back() outputs, `act` between affine layers (none after the last).
Stack make_mlp(const std::vector<size_t>& dims, Act act, std::mt19937_64& rng);

}  // namespace dds
