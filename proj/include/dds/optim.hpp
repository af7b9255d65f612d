#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dds {

// Weight decay is applied as a classical additive L2 gradient term in both
// optimizers.

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-3;
};

class AdamState {
 public:
  AdamState(size_t n, AdamConfig cfg);

  // Throws NumericError naming `who` on NaN/inf gradients.
  void step(std::span<double> params, std::span<const double> grads,
            const std::string& who);

  long steps_taken() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

struct SgdConfig {
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 3e-4;
};

class SgdMomentumState {
 public:
  SgdMomentumState(size_t n, SgdConfig cfg);

  void step(std::span<double> params, std::span<const double> grads,
            const std::string& who);

  long steps_taken() const { return t_; }
  const SgdConfig& config() const { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  SgdConfig cfg_;
  std::vector<double> velocity_;
  long t_ = 0;
};

// Triangular cyclic schedule: ramps base -> max over step_size_up steps,
// then max -> base over step_size_down, repeating.
struct CyclicLrSchedule {
  double base_lr = 0.001;
  double max_lr = 0.01;
  int step_size_up = 10;
  int step_size_down = 10;
  long current_step = 0;

  void validate() const;
  double lr() const;
  void advance() { ++current_step; }
  // Repositions so the next emitted lr is max_lr with decay resuming, the
  // warm-restart used when a fresh data subset arrives.
  void reset_to_max() { current_step = step_size_up; }
};

// Cosine annealing from lr_max down to lr_min over `period` steps, then
// held at lr_min. Available as an alternative schedule kind.
struct CosineLrSchedule {
  double lr_max = 0.025;
  double lr_min = 0.0;
  int period = 50;
  long current_step = 0;

  double lr() const;
  void advance() { ++current_step; }
};

}  // namespace dds
