#include "layoutlab/optim.hpp"

#include <cmath>

#include "layoutlab/error.hpp"

namespace layoutlab {

Adam::Adam(std::size_t size, AdamConfig cfg) : cfg_(cfg), m_(size, 0.0f), v_(size, 0.0f) {}

void Adam::step(std::span<float> params, std::span<const float> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw InputError("optimizer state does not match the parameter count");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const float b1 = static_cast<float>(cfg_.beta1), b2 = static_cast<float>(cfg_.beta2);
  const float step = static_cast<float>(lr / bc1);
  const float inv_bc2 = static_cast<float>(1.0 / bc2);
  const float eps = static_cast<float>(cfg_.eps);
  const float decay = static_cast<float>(lr * cfg_.weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const float gi = grads[i];
    m_[i] = b1 * m_[i] + (1.0f - b1) * gi;
    v_[i] = b2 * v_[i] + (1.0f - b2) * gi * gi;
    params[i] -= step * m_[i] / (std::sqrt(v_[i] * inv_bc2) + eps) + decay * params[i];
  }
}

double grad_norm(std::span<const float> grads) {
  double s = 0.0;
  for (float g : grads) s += static_cast<double>(g) * g;
  return std::sqrt(s);
}

double clip_grad_norm(std::span<float> grads, double max_norm) {
  const double n = grad_norm(grads);
  if (n > max_norm && n > 0.0) {
    const float k = static_cast<float>(max_norm / n);
    for (float& g : grads) g *= k;
  }
  return n;
}

}  // namespace layoutlab
