#include "dds/optim.hpp"

#include <cmath>

#include "dds/common.hpp"

namespace dds {

AdamState::AdamState(size_t n, AdamConfig cfg)
    : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

void AdamState::step(std::span<double> params, std::span<const double> grads,
                     const std::string& who) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ConfigError("adam: size mismatch for " + who);
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(grads[i]))
      throw NumericError("adam: non-finite gradient in " + who +
                         " at index " + std::to_string(i));
    const double g = grads[i] + cfg_.weight_decay * params[i];
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
  }
}

SgdMomentumState::SgdMomentumState(size_t n, SgdConfig cfg)
    : cfg_(cfg), velocity_(n, 0.0) {}

void SgdMomentumState::step(std::span<double> params,
                            std::span<const double> grads,
                            const std::string& who) {
  if (params.size() != velocity_.size() || grads.size() != velocity_.size())
    throw ConfigError("sgd: size mismatch for " + who);
  ++t_;
  for (size_t i = 0; i < params.size(); ++i) {
    if (!std::isfinite(grads[i]))
      throw NumericError("sgd: non-finite gradient in " + who + " at index " +
                         std::to_string(i));
    const double g = grads[i] + cfg_.weight_decay * params[i];
    velocity_[i] = cfg_.momentum * velocity_[i] + g;
    params[i] -= cfg_.lr * velocity_[i];
  }
}

void CyclicLrSchedule::validate() const {
  if (!(base_lr < max_lr))
    throw ConfigError("cyclic lr: base_lr must be < max_lr");
  if (step_size_up <= 0 || step_size_down <= 0)
    throw ConfigError("cyclic lr: step sizes must be positive");
  if (current_step < 0)
    throw ConfigError("cyclic lr: negative step");
}

double CyclicLrSchedule::lr() const {
  validate();
  const long cycle = step_size_up + step_size_down;
  const long pos = current_step % cycle;
  if (pos <= step_size_up)
    return base_lr + (max_lr - base_lr) * static_cast<double>(pos) /
                         static_cast<double>(step_size_up);
  return max_lr - (max_lr - base_lr) * static_cast<double>(pos - step_size_up) /
                      static_cast<double>(step_size_down);
}

double CosineLrSchedule::lr() const {
  if (period <= 0) throw ConfigError("cosine lr: period must be positive");
  const double t = std::min<double>(static_cast<double>(current_step),
                                    static_cast<double>(period));
  return lr_min + 0.5 * (lr_max - lr_min) *
                      (1.0 + std::cos(M_PI * t / static_cast<double>(period)));
}

}  // namespace dds
