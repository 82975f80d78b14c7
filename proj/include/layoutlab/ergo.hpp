#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "layoutlab/category.hpp"
#include "layoutlab/dual.hpp"
#include "layoutlab/layout.hpp"

namespace layoutlab {

struct ErgoParams {
  double reach_distance = 0.8;  // d_R, meters
  double reach_sharpness = 15.0;
  double temperature = 10.0;  // softmin/softmax beta
  double epsilon = 0.006737946999085467;  // e^-5
  double book_offset = 0.3;  // meters along the seat orientation

  void check() const;  // throws InputError
};

enum class Activity : int { kBook = 0, kTv = 1, kComputer = 2, kWork = 3 };
inline constexpr int kNumActivities = 4;
const char* activity_name(Activity a);

struct ErgoReport {
  // Scaled activity costs in [-ln(1+eps), 5]; nullopt when the activity cannot
  // be performed in the scene.
  std::array<std::optional<double>, kNumActivities> activity{};
  // Same aggregation over unscaled rule costs, in [0, 1].
  std::array<std::optional<double>, kNumActivities> activity_unscaled{};
  double score = 0.0;         // E: mean of present scaled activity costs
  double weight_score = 0.0;  // E-hat: unscaled counterpart, in [0, 1]
  // dE/d(attribute) per object (room row is zero); empty unless requested.
  std::vector<std::array<double, kNumAttrs>> gradient;

  int active_count() const;
};

// Individual rule costs, each in [0, 1].
double reach_cost(Vec2 p, Vec2 q, const ErgoParams& params = {});
double visibility_cost(Vec2 p, Vec2 u, Vec2 q);  // throws InputError when q == p
double lighting_cost(Vec2 p, Vec2 q, std::span<const Vec2> lights, const ErgoParams& params = {});
double glare_cost(Vec2 p, Vec2 q, std::span<const Vec2> lights, const ErgoParams& params = {});
double rescale(double cost, const ErgoParams& params = {});

// <e, softmin(beta e)> and <e, softmax(beta e)>.
double softmin_aggregate(std::span<const double> e, double beta);
double softmax_aggregate(std::span<const double> e, double beta);

ErgoReport activity_costs(const Layout& layout, const Taxonomy& taxonomy, const ErgoParams& params = {});
ErgoReport scene_score_grad(const Layout& layout, const Taxonomy& taxonomy, const ErgoParams& params = {});

// Scaled score and its derivative with respect to a single attribute.
Dual scene_score_along(const Layout& layout, int object, Attr attr, const Taxonomy& taxonomy,
                       const ErgoParams& params = {});

}  // namespace layoutlab
