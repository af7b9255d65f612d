#include "dds/layers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "dds/common.hpp"

namespace dds {

Tensor forward_dense(const Tensor& input, const Tensor& weights,
                     const Tensor& bias) {
  const size_t in = input.size();
  if (weights.shape.size() != 2)
    throw ConfigError("dense weights must be 2-D (out x in)");
  const size_t out = weights.shape[0];
  if (weights.shape[1] != in)
    throw ConfigError("dense shape mismatch: weights expect " +
                      std::to_string(weights.shape[1]) + " inputs, got " +
                      std::to_string(in));
  if (bias.size() != out)
    throw ConfigError("dense bias length " + std::to_string(bias.size()) +
                      " does not match output dim " + std::to_string(out));
  Tensor y = Tensor::zeros({out});
  for (size_t o = 0; o < out; ++o) {
    double acc = bias.data[o];
    const double* wrow = weights.data.data() + o * in;
    for (size_t i = 0; i < in; ++i) acc += wrow[i] * input.data[i];
    y.data[o] = acc;
  }
  return y;
}

// ---------------------------------------------------------------------------
// DenseLayer

DenseLayer::DenseLayer(size_t in, size_t out)
    : in_(in), out_(out), params_(in * out + out, 0.0),
      grads_(in * out + out, 0.0), last_x_(in, 0.0) {}

void DenseLayer::init(std::mt19937_64& rng, double scale) {
  if (scale <= 0.0) scale = 1.0 / std::sqrt(static_cast<double>(in_));
  std::normal_distribution<double> dist(0.0, scale);
  for (size_t i = 0; i < in_ * out_; ++i) params_[i] = dist(rng);
  for (size_t o = 0; o < out_; ++o) params_[in_ * out_ + o] = 0.0;
}

void DenseLayer::infer(std::span<const double> x, std::span<double> y) const {
  if (x.size() != in_ || y.size() != out_)
    throw ConfigError("dense infer: shape mismatch");
  const double* w = weight();
  const double* b = bias();
  for (size_t o = 0; o < out_; ++o) {
    double acc = b[o];
    const double* wrow = w + o * in_;
    for (size_t i = 0; i < in_; ++i) acc += wrow[i] * x[i];
    y[o] = acc;
  }
}

void DenseLayer::forward(std::span<const double> x, std::span<double> y) {
  std::copy(x.begin(), x.end(), last_x_.begin());
  infer(x, y);
}

void DenseLayer::backward(std::span<const double> gy, std::span<double> gx) {
  const double* w = weight();
  double* gw = grads_.data();
  double* gb = grads_.data() + in_ * out_;
  std::fill(gx.begin(), gx.end(), 0.0);
  for (size_t o = 0; o < out_; ++o) {
    const double g = gy[o];
    gb[o] += g;
    const double* wrow = w + o * in_;
    double* gwrow = gw + o * in_;
    for (size_t i = 0; i < in_; ++i) {
      gwrow[i] += g * last_x_[i];
      gx[i] += wrow[i] * g;
    }
  }
}

void DenseLayer::tangent(std::span<const double> tx,
                         std::span<double> ty) const {
  const double* w = weight();
  for (size_t o = 0; o < out_; ++o) {
    double acc = 0.0;
    const double* wrow = w + o * in_;
    for (size_t i = 0; i < in_; ++i) acc += wrow[i] * tx[i];
    ty[o] = acc;
  }
}

void DenseLayer::tangent_backward(std::span<const double> tx,
                                  std::span<const double> gty,
                                  std::span<double> gtx,
                                  std::span<double> gx_accum) {
  (void)gx_accum;  // affine layer: Jacobian does not depend on the input
  const double* w = weight();
  double* gw = grads_.data();
  std::fill(gtx.begin(), gtx.end(), 0.0);
  for (size_t o = 0; o < out_; ++o) {
    const double g = gty[o];
    const double* wrow = w + o * in_;
    double* gwrow = gw + o * in_;
    for (size_t i = 0; i < in_; ++i) {
      gwrow[i] += g * tx[i];
      gtx[i] += wrow[i] * g;
    }
  }
}

// ---------------------------------------------------------------------------
// ActivationLayer

std::string ActivationLayer::name() const {
  switch (kind_) {
    case Act::relu: return "relu";
    case Act::tanh: return "tanh";
    case Act::sigmoid: return "sigmoid";
  }
  return "?";
}

double ActivationLayer::act(double z) const {
  switch (kind_) {
    case Act::relu: return z > 0.0 ? z : 0.0;
    case Act::tanh: return std::tanh(z);
    case Act::sigmoid: return 1.0 / (1.0 + std::exp(-z));
  }
  return 0.0;
}

double ActivationLayer::dact(double z) const {
  switch (kind_) {
    case Act::relu: return z > 0.0 ? 1.0 : 0.0;
    case Act::tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Act::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
  }
  return 0.0;
}

double ActivationLayer::ddact(double z) const {
  switch (kind_) {
    case Act::relu: return 0.0;
    case Act::tanh: {
      const double t = std::tanh(z);
      return -2.0 * t * (1.0 - t * t);
    }
    case Act::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
  }
  return 0.0;
}

void ActivationLayer::infer(std::span<const double> x,
                            std::span<double> y) const {
  for (size_t i = 0; i < dim_; ++i) y[i] = act(x[i]);
}

void ActivationLayer::forward(std::span<const double> x, std::span<double> y) {
  last_z_.assign(x.begin(), x.end());
  infer(x, y);
}

void ActivationLayer::backward(std::span<const double> gy,
                               std::span<double> gx) {
  for (size_t i = 0; i < dim_; ++i) gx[i] = gy[i] * dact(last_z_[i]);
}

void ActivationLayer::tangent(std::span<const double> tx,
                              std::span<double> ty) const {
  for (size_t i = 0; i < dim_; ++i) ty[i] = tx[i] * dact(last_z_[i]);
}

void ActivationLayer::tangent_backward(std::span<const double> tx,
                                       std::span<const double> gty,
                                       std::span<double> gtx,
                                       std::span<double> gx_accum) {
  for (size_t i = 0; i < dim_; ++i) {
    gtx[i] = gty[i] * dact(last_z_[i]);
    // d/dz of (sigma'(z) * t): couples the tangent objective to the primal
    gx_accum[i] += ddact(last_z_[i]) * gty[i] * tx[i];
  }
}

// ---------------------------------------------------------------------------
// Conv3x3Layer

Conv3x3Layer::Conv3x3Layer(size_t h, size_t w)
    : h_(h), w_(w), params_(10, 0.0), grads_(10, 0.0), last_x_(h * w, 0.0) {}

void Conv3x3Layer::init(std::mt19937_64& rng, double scale) {
  if (scale <= 0.0) scale = 1.0 / 3.0;
  std::normal_distribution<double> dist(0.0, scale);
  for (int i = 0; i < 9; ++i) params_[i] = dist(rng);
  params_[9] = 0.0;
}

void Conv3x3Layer::conv(const double* x, const double* k, double bias,
                        double* y) const {
  const int H = static_cast<int>(h_), W = static_cast<int>(w_);
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      double acc = bias;
      for (int dr = -1; dr <= 1; ++dr) {
        const int rr = r + dr;
        if (rr < 0 || rr >= H) continue;
        for (int dc = -1; dc <= 1; ++dc) {
          const int cc = c + dc;
          if (cc < 0 || cc >= W) continue;
          acc += k[(dr + 1) * 3 + (dc + 1)] * x[rr * W + cc];
        }
      }
      y[r * W + c] = acc;
    }
  }
}

void Conv3x3Layer::kernel_grad(const double* gy, const double* x,
                               double* gk) const {
  const int H = static_cast<int>(h_), W = static_cast<int>(w_);
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      const double g = gy[r * W + c];
      for (int dr = -1; dr <= 1; ++dr) {
        const int rr = r + dr;
        if (rr < 0 || rr >= H) continue;
        for (int dc = -1; dc <= 1; ++dc) {
          const int cc = c + dc;
          if (cc < 0 || cc >= W) continue;
          gk[(dr + 1) * 3 + (dc + 1)] += g * x[rr * W + cc];
        }
      }
    }
  }
}

void Conv3x3Layer::input_grad(const double* gy, const double* k,
                              double* gx) const {
  const int H = static_cast<int>(h_), W = static_cast<int>(w_);
  // transpose of the correlation: scatter each output adjoint to its taps
  for (int r = 0; r < H; ++r) {
    for (int c = 0; c < W; ++c) {
      const double g = gy[r * W + c];
      for (int dr = -1; dr <= 1; ++dr) {
        const int rr = r + dr;
        if (rr < 0 || rr >= H) continue;
        for (int dc = -1; dc <= 1; ++dc) {
          const int cc = c + dc;
          if (cc < 0 || cc >= W) continue;
          gx[rr * W + cc] += g * k[(dr + 1) * 3 + (dc + 1)];
        }
      }
    }
  }
}

void Conv3x3Layer::infer(std::span<const double> x, std::span<double> y) const {
  if (x.size() != h_ * w_) throw ConfigError("conv3x3: input size mismatch");
  conv(x.data(), params_.data(), params_[9], y.data());
}

void Conv3x3Layer::forward(std::span<const double> x, std::span<double> y) {
  std::copy(x.begin(), x.end(), last_x_.begin());
  infer(x, y);
}

void Conv3x3Layer::backward(std::span<const double> gy, std::span<double> gx) {
  std::fill(gx.begin(), gx.end(), 0.0);
  kernel_grad(gy.data(), last_x_.data(), grads_.data());
  for (double g : gy) grads_[9] += g;
  input_grad(gy.data(), params_.data(), gx.data());
}

void Conv3x3Layer::tangent(std::span<const double> tx,
                           std::span<double> ty) const {
  conv(tx.data(), params_.data(), 0.0, ty.data());  // bias drops in J*t
}

void Conv3x3Layer::tangent_backward(std::span<const double> tx,
                                    std::span<const double> gty,
                                    std::span<double> gtx,
                                    std::span<double> gx_accum) {
  (void)gx_accum;  // linear in x: Jacobian independent of the input
  std::fill(gtx.begin(), gtx.end(), 0.0);
  kernel_grad(gty.data(), tx.data(), grads_.data());
  input_grad(gty.data(), params_.data(), gtx.data());
}

// ---------------------------------------------------------------------------
// Stack

void Stack::add(std::unique_ptr<Layer> layer) {
  if (!layers_.empty() && layers_.back()->out_dim() != layer->in_dim())
    throw ConfigError("stack: layer dims do not chain");
  layers_.push_back(std::move(layer));
  acts_.assign(layers_.size() + 1, {});
  tangs_.assign(layers_.size() + 1, {});
}

size_t Stack::in_dim() const {
  return layers_.empty() ? 0 : layers_.front()->in_dim();
}

size_t Stack::out_dim() const {
  return layers_.empty() ? 0 : layers_.back()->out_dim();
}

std::span<const double> Stack::forward(std::span<const double> x) {
  acts_[0].assign(x.begin(), x.end());
  for (size_t l = 0; l < layers_.size(); ++l) {
    acts_[l + 1].resize(layers_[l]->out_dim());
    layers_[l]->forward(acts_[l], acts_[l + 1]);
  }
  ga_accum_.assign(layers_.size() + 1, {});
  for (size_t l = 0; l <= layers_.size(); ++l)
    ga_accum_[l].assign(l == 0 ? in_dim() : layers_[l - 1]->out_dim(), 0.0);
  return acts_.back();
}

void Stack::infer(std::span<const double> x, std::span<double> y) const {
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (const auto& layer : layers_) {
    next.resize(layer->out_dim());
    layer->infer(cur, next);
    cur.swap(next);
  }
  std::copy(cur.begin(), cur.end(), y.begin());
}

std::vector<double> Stack::backward(std::span<const double> gy) {
  std::vector<double> g(gy.begin(), gy.end());
  std::vector<double> gprev;
  for (size_t l = layers_.size(); l-- > 0;) {
    gprev.assign(layers_[l]->in_dim(), 0.0);
    layers_[l]->backward(g, gprev);
    g.swap(gprev);
  }
  return g;
}

std::span<const double> Stack::tangent_forward(std::span<const double> tx) {
  tangs_[0].assign(tx.begin(), tx.end());
  for (size_t l = 0; l < layers_.size(); ++l) {
    tangs_[l + 1].resize(layers_[l]->out_dim());
    layers_[l]->tangent(tangs_[l], tangs_[l + 1]);
  }
  return tangs_.back();
}

void Stack::tangent_backward(std::span<const double> gty) {
  std::vector<double> gt(gty.begin(), gty.end());
  std::vector<double> gt_prev;
  for (size_t l = layers_.size(); l-- > 0;) {
    gt_prev.assign(layers_[l]->in_dim(), 0.0);
    layers_[l]->tangent_backward(tangs_[l], gt, gt_prev, ga_accum_[l]);
    gt.swap(gt_prev);
  }
}

std::vector<double> Stack::flush_tangent_adjoints() {
  std::vector<double> carry = ga_accum_[layers_.size()];
  for (size_t l = layers_.size(); l-- > 0;) {
    std::vector<double> prev(layers_[l]->in_dim(), 0.0);
    layers_[l]->backward(carry, prev);
    for (size_t i = 0; i < prev.size(); ++i) prev[i] += ga_accum_[l][i];
    carry.swap(prev);
    std::fill(ga_accum_[l + 1].begin(), ga_accum_[l + 1].end(), 0.0);
  }
  std::fill(ga_accum_[0].begin(), ga_accum_[0].end(), 0.0);
  return carry;
}

std::vector<std::span<double>> Stack::param_views() {
  std::vector<std::span<double>> v;
  for (auto& l : layers_)
    if (!l->params().empty()) v.push_back(l->params());
  return v;
}

std::vector<std::span<double>> Stack::grad_views() {
  std::vector<std::span<double>> v;
  for (auto& l : layers_)
    if (!l->grads().empty()) v.push_back(l->grads());
  return v;
}

void Stack::zero_grads() {
  for (auto& l : layers_) l->zero_grads();
}

size_t Stack::param_count() const {
  size_t n = 0;
  for (const auto& l : layers_)
    n += const_cast<Layer&>(*l).params().size();
  return n;
}

std::vector<double> Stack::flat_params() const {
  std::vector<double> p;
  for (const auto& l : layers_) {
    auto view = const_cast<Layer&>(*l).params();
    p.insert(p.end(), view.begin(), view.end());
  }
  return p;
}

void Stack::set_flat_params(std::span<const double> p) {
  size_t off = 0;
  for (auto& l : layers_) {
    auto view = l->params();
    if (off + view.size() > p.size())
      throw ConfigError("stack: flat param vector too short");
    std::copy(p.begin() + off, p.begin() + off + view.size(), view.begin());
    off += view.size();
  }
  if (off != p.size()) throw ConfigError("stack: flat param vector too long");
}

Stack make_mlp(const std::vector<size_t>& dims, Act act,
               std::mt19937_64& rng) {
  if (dims.size() < 2) throw ConfigError("mlp needs at least two dims");
  Stack s;
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    auto dense = std::make_unique<DenseLayer>(dims[i], dims[i + 1]);
    dense->init(rng);
    s.add(std::move(dense));
    if (i + 2 < dims.size())
      s.add(std::make_unique<ActivationLayer>(act, dims[i + 1]));
  }
  return s;
}

}  // namespace dds
