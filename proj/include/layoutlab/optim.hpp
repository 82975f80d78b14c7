#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace layoutlab {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled
};

// Adam over a flat parameter vector.
class Adam {
 public:
  Adam(std::size_t size, AdamConfig cfg = {});

  void step(std::span<float> params, std::span<const float> grads, double lr);
  std::int64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::vector<float> m_, v_;
  std::int64_t t_ = 0;
};

// Global L2 norm of `grads`.
double grad_norm(std::span<const float> grads);

// Scales gradients so their norm is at most `max_norm`; returns the norm
// before clipping.
double clip_grad_norm(std::span<float> grads, double max_norm);

}  // namespace layoutlab
