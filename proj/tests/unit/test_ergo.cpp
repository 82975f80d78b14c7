#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "layoutlab/ergo.hpp"
#include "layoutlab/error.hpp"

using namespace layoutlab;
using namespace testing;

namespace {

const double kEps = std::exp(-5.0);
double hand_rescale(double e) { return -std::log(1.0 + kEps - e); }

}  // namespace

TEST_SUITE("ergo") {
  TEST_CASE("reach cost") {
    CHECK(reach_cost({0, 0}, {0.8, 0}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(reach_cost({0, 0}, {0, 0}) == doctest::Approx(1.0 / (1.0 + std::exp(12.0))).epsilon(1e-9));
    CHECK(reach_cost({0, 0}, {0, 0}) == doctest::Approx(6.14e-6).epsilon(1e-3));
    CHECK(reach_cost({0, 0}, {100, 0}) == doctest::Approx(1.0));
  }

  TEST_CASE("visibility cost") {
    CHECK(visibility_cost({0, 0}, {0, 1}, {0, 2}) == doctest::Approx(0.0));
    CHECK(visibility_cost({0, 0}, {0, -1}, {0, 2}) == doctest::Approx(1.0));
    CHECK(visibility_cost({0, 0}, {1, 0}, {0, 2}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(visibility_cost({1, 1}, {1, 0}, {1, 1}), InputError);
  }

  TEST_CASE("lighting cost") {
    // Viewer at the origin reading toward +y; a light further back on the
    // same line shines along the view direction.
    const std::vector<Vec2> behind = {{0, -2}};
    CHECK(lighting_cost({0, 0}, {0, 1}, behind) == doctest::Approx(0.0));
    const std::vector<Vec2> side = {{3, 1}};
    // Light (3,1) -> book (0,1) is perpendicular to the view direction.
    const double e_side = std::pow(1.0 - (1.0 + 0.0) / 2.0, 4);
    CHECK(lighting_cost({0, 0}, {0, 1}, side) == doctest::Approx(e_side));
    // Costs {0, 1}: softmin weights {1, e^-10}.
    const std::vector<Vec2> two = {{0, -2}, {0, 3}};
    const double w = std::exp(-10.0);
    CHECK(lighting_cost({0, 0}, {0, 1}, two) == doctest::Approx(w / (1.0 + w)).epsilon(1e-9));
    CHECK(lighting_cost({0, 0}, {0, 1}, two) == doctest::Approx(4.54e-5).epsilon(1e-3));
    CHECK(lighting_cost({0, 0}, {0, 1}, {}) == 1.0);
  }

  TEST_CASE("glare cost") {
    const std::vector<Vec2> ahead = {{0, 5}};
    CHECK(glare_cost({0, 0}, {0, 1}, ahead) == doctest::Approx(1.0));
    const std::vector<Vec2> behind = {{0, -5}};
    CHECK(glare_cost({0, 0}, {0, 1}, behind) == doctest::Approx(0.0));
    const std::vector<Vec2> two = {{0, -5}, {0, 5}};
    const double w = std::exp(10.0);
    CHECK(glare_cost({0, 0}, {0, 1}, two) == doctest::Approx(w / (1.0 + w)).epsilon(1e-12));
    CHECK(glare_cost({0, 0}, {0, 1}, two) == doctest::Approx(0.99995).epsilon(1e-5));
    CHECK(glare_cost({0, 0}, {0, 1}, {}) == 0.0);
  }

  TEST_CASE("rescale") {
    CHECK(std::abs(rescale(1.0) - 5.0) <= 1e-12);
    CHECK(rescale(0.0) == doctest::Approx(-std::log1p(kEps)).epsilon(1e-12));
    CHECK(rescale(0.0) == doctest::Approx(-0.0067153).epsilon(1e-4));
    CHECK(rescale(0.5) == doctest::Approx(0.6798).epsilon(1e-4));
  }

  TEST_CASE("softmin and softmax aggregation") {
    const std::vector<double> eq = {0.3, 0.3, 0.3};
    CHECK(std::abs(softmin_aggregate(eq, 10) - 0.3) <= 1e-12);
    CHECK(std::abs(softmax_aggregate(eq, 10) - 0.3) <= 1e-12);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> e(5);
      for (double& v : e) v = u(rng);
      const double lo = *std::min_element(e.begin(), e.end()), hi = *std::max_element(e.begin(), e.end());
      const double a = softmin_aggregate(e, 10), b = softmax_aggregate(e, 10);
      CHECK(a >= lo - 1e-12);
      CHECK(a <= hi + 1e-12);
      CHECK(b >= lo - 1e-12);
      CHECK(b <= hi + 1e-12);
      CHECK(a <= b + 1e-12);
    }
  }

  TEST_CASE("activity presence") {
    const Taxonomy& t = Taxonomy::builtin();
    Layout l = room_only(t, 4, 4);
    ErgoReport r = activity_costs(l, t);
    CHECK(r.active_count() == 0);
    CHECK(r.score == 0.0);
    CHECK(r.weight_score == 0.0);

    l.objects.push_back(obj(t, "wardrobe", 0, 1.5, 0.6, 0.5, 3.3));
    CHECK(activity_costs(l, t).active_count() == 0);

    l.objects.push_back(obj(t, "double_bed", 0, 1.6, 2.0, 1.2, 0.1));
    l.objects.push_back(obj(t, "indoor_lamp", 0, 0.3, 0.3, 0.5, 0.5));
    r = activity_costs(l, t);
    CHECK(r.active_count() == 1);
    REQUIRE(r.activity[0].has_value());
    CHECK(r.score == doctest::Approx(*r.activity[0]));
    CHECK(r.weight_score == doctest::Approx(*r.activity_unscaled[0]));
  }

  TEST_CASE("watch-TV cost matches a hand evaluation") {
    const Taxonomy& t = Taxonomy::builtin();
    Layout l = room_only(t, 5, 5);
    l.objects.push_back(centered(t, "chair", 0.0, 0.5, 0.5, 2.0, 2.0));
    l.objects.push_back(centered(t, "tv", 0.0, 1.0, 0.1, 3.0, 4.0));
    l.objects.push_back(centered(t, "floor_lamp", 0.0, 0.3, 0.3, 2.3, 1.0));
    const ErgoReport r = activity_costs(l, t);
    REQUIRE(r.activity[1].has_value());

    const double ux = 0.0, uy = 1.0;
    const double vx = 1.0 / std::sqrt(5.0), vy = 2.0 / std::sqrt(5.0);
    const double vis = 1.0 - std::pow((1.0 + ux * vx + uy * vy) / 2.0, 2);
    const double gx = 0.3, gy = -1.0, gn = std::hypot(gx, gy);
    const double glare = std::pow((1.0 + (vx * gx + vy * gy) / gn) / 2.0, 4);
    const double expect = (hand_rescale(vis) + hand_rescale(glare)) / 2.0;
    CHECK(*r.activity[1] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(*r.activity_unscaled[1] == doctest::Approx((vis + glare) / 2.0).epsilon(1e-12));
  }

  TEST_CASE("a duplicate seat leaves each activity unchanged") {
    const Taxonomy& t = Taxonomy::builtin();
    Layout l = room_only(t, 5, 5);
    l.objects.push_back(centered(t, "sofa", 0.3, 1.8, 0.8, 2.0, 1.5));
    l.objects.push_back(centered(t, "tv", kPi, 1.0, 0.1, 2.5, 4.5));
    l.objects.push_back(centered(t, "floor_lamp", 0.0, 0.3, 0.3, 0.5, 0.5));
    const ErgoReport a = activity_costs(l, t);
    l.objects.push_back(l.objects[1]);
    const ErgoReport b = activity_costs(l, t);
    for (int k = 0; k < kNumActivities; ++k) {
      REQUIRE(a.activity[k].has_value() == b.activity[k].has_value());
      if (a.activity[k]) CHECK(std::abs(*a.activity[k] - *b.activity[k]) < 1e-12);
    }
  }

  TEST_CASE("scores stay in range and are invariant to rigid motion") {
    const Taxonomy& t = Taxonomy::builtin();
    std::mt19937_64 rng(5);
    for (int k = 0; k < 20; ++k) {
      const Layout l = random_ergo_scene(rng, t);
      const ErgoReport r = activity_costs(l, t);
      CHECK(r.score >= -std::log1p(kEps) - 1e-12);
      CHECK(r.score <= 5.0 + 1e-12);
      CHECK(r.weight_score >= 0.0);
      CHECK(r.weight_score <= 1.0);

      Layout moved = l;
      for (std::size_t i = 1; i < moved.objects.size(); ++i) {
        moved.objects[i].x += 0.37;
        moved.objects[i].y -= 0.21;
      }
      CHECK(activity_costs(moved, t).score == doctest::Approx(r.score).epsilon(1e-10));

      // Quarter turn about the origin: centers rotate, orientations add pi/2.
      Layout turned = l;
      for (std::size_t i = 1; i < l.objects.size(); ++i) {
        const FurnObj& o = l.objects[i];
        const Vec2 c = center_of(o);
        double no = o.orientation + kPi / 2;
        if (no > kPi) no -= 2 * kPi;
        turned.objects[i] = centered(t, t.at(o.category).name, no, o.width, o.depth, -c.y, c.x);
      }
      CHECK(activity_costs(turned, t).score == doctest::Approx(r.score).epsilon(1e-9));
    }
  }

  TEST_CASE("analytic gradient matches central differences") {
    const Taxonomy& t = Taxonomy::builtin();
    std::mt19937_64 rng(9);
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const Layout l = random_ergo_scene(rng, t);
      const ErgoReport r = scene_score_grad(l, t);
      REQUIRE(r.gradient.size() == l.objects.size());
      for (std::size_t i = 1; i < l.objects.size(); ++i)
        for (int a = 0; a < kNumAttrs; ++a) {
          const double fd = central_difference(l, i, static_cast<Attr>(a), 1e-4,
                                               [&](const Layout& x) { return activity_costs(x, t).score; });
          worst = std::max(worst, rel_err(r.gradient[i][static_cast<std::size_t>(a)], fd));
          const Dual d = scene_score_along(l, static_cast<int>(i), static_cast<Attr>(a), t);
          CHECK(d.d == doctest::Approx(r.gradient[i][static_cast<std::size_t>(a)]).epsilon(1e-12));
        }
    }
    CHECK(worst < 1e-4);
  }

  TEST_CASE("translation invariance: gradient components sum to zero per axis") {
    const Taxonomy& t = Taxonomy::builtin();
    std::mt19937_64 rng(10);
    const Layout l = random_ergo_scene(rng, t);
    const ErgoReport r = scene_score_grad(l, t);
    double sx = 0.0, sy = 0.0, mag = 0.0;
    for (std::size_t i = 1; i < l.objects.size(); ++i) {
      sx += r.gradient[i][static_cast<std::size_t>(Attr::kX)];
      sy += r.gradient[i][static_cast<std::size_t>(Attr::kY)];
      mag += std::abs(r.gradient[i][static_cast<std::size_t>(Attr::kX)]);
    }
    CHECK(mag > 0.0);
    CHECK(std::abs(sx) < 1e-10);
    CHECK(std::abs(sy) < 1e-10);
  }

  TEST_CASE("unreferenced objects get zero gradient") {
    const Taxonomy& t = Taxonomy::builtin();
    std::mt19937_64 rng(12);
    Layout l = random_ergo_scene(rng, t);
    l.objects.push_back(centered(t, "wardrobe", 0.4, 1.5, 0.6, 1.0, 1.0));
    const ErgoReport r = scene_score_grad(l, t);
    for (double g : r.gradient.back()) CHECK(g == 0.0);
    for (double g : r.gradient.front()) CHECK(g == 0.0);
  }
}
