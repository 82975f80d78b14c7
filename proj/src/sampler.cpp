#include "layoutlab/sampler.hpp"

#include <algorithm>
#include <numeric>

#include "layoutlab/error.hpp"

namespace layoutlab {

std::vector<int> nucleus_set(std::span<const double> probs, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InputError("top-p must lie in (0, 1]");
  if (probs.empty()) throw InputError("empty distribution");
  std::vector<int> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return probs[static_cast<std::size_t>(a)] > probs[static_cast<std::size_t>(b)]; });
  double total = 0.0;
  for (double v : probs) total += v;
  std::vector<int> out;
  double mass = 0.0;
  for (int i : order) {
    if (probs[static_cast<std::size_t>(i)] <= 0.0 && !out.empty()) break;
    out.push_back(i);
    mass += probs[static_cast<std::size_t>(i)];
    if (mass >= p * total - 1e-12) break;
  }
  return out;
}

std::vector<double> nucleus_distribution(std::span<const double> probs, double p) {
  const std::vector<int> set = nucleus_set(probs, p);
  double mass = 0.0;
  for (int i : set) mass += probs[static_cast<std::size_t>(i)];
  std::vector<double> out(probs.size(), 0.0);
  for (int i : set) out[static_cast<std::size_t>(i)] = mass > 0.0 ? probs[static_cast<std::size_t>(i)] / mass : 1.0 / static_cast<double>(set.size());
  return out;
}

int nucleus_sample(std::span<const double> probs, double p, std::mt19937_64& rng) {
  const std::vector<int> set = nucleus_set(probs, p);
  double mass = 0.0;
  for (int i : set) mass += probs[static_cast<std::size_t>(i)];
  if (!(mass > 0.0)) return set.front();
  const double u = std::uniform_real_distribution<double>(0.0, mass)(rng);
  double acc = 0.0;
  for (int i : set) {
    acc += probs[static_cast<std::size_t>(i)];
    if (u < acc) return i;
  }
  return set.back();
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw InputError("argmax of an empty vector");
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace layoutlab
