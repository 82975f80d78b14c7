#include <doctest.h>

#include <cmath>
#include <set>

#include "helpers.hpp"
#include "layoutlab/ergo.hpp"
#include "layoutlab/error.hpp"
#include "layoutlab/synth_corpus.hpp"

using namespace layoutlab;
using namespace testing;
using nlohmann::json;

namespace {

json object_json(const std::string& cat, double o, double w, double d, double x, double y) {
  return {{"category", cat}, {"orientation", o}, {"width", w}, {"depth", d}, {"x", x}, {"y", y}};
}

json room_json(int id, double w, double d, bool l_shaped) {
  json r = {{"id", "room-" + std::to_string(id)}, {"type", "bedroom"}, {"width", w}, {"depth", d}};
  if (l_shaped)
    r["floor"] = json::array({{0, 0}, {w, 0}, {w, d / 2}, {w / 2, d / 2}, {w / 2, d}, {0, d}});
  else
    r["floor"] = json::array({{0, 0}, {w, 0}, {w, d}, {0, d}});
  r["objects"] = json::array({object_json("double_bed", 0, 1.6, 2.0, 1.0, 0.2),
                              object_json("nightstand", 0, 0.4, 0.4, 0.4, 0.2)});
  return r;
}

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("import drops L-shaped rooms") {
    const Taxonomy& t = Taxonomy::builtin();
    json doc = {{"version", 1}, {"rooms", json::array()}};
    for (int i = 0; i < 10; ++i) doc["rooms"].push_back(room_json(i, 4.0 + 0.1 * i, 3.5, i == 3 || i == 7));
    ImportReport rep;
    const Corpus c = import_corpus(doc, t, {}, &rep);
    CHECK(c.size() == 8);
    CHECK(rep.rooms_read == 10);
    CHECK(rep.imported == 8);
    CHECK(rep.dropped_nonrectangular == 2);
    CHECK(c.bounds.w_min == doctest::Approx(4.0));
    CHECK(c.bounds.w_max == doctest::Approx(4.9));
    // A degenerate depth range is widened by 0.5 m on each side.
    CHECK(c.bounds.d_min == doctest::Approx(3.0));
    CHECK(c.bounds.d_max == doctest::Approx(4.0));
  }

  TEST_CASE("rectangle test") {
    CHECK(is_rectangular({{0, 0}, {2, 0}, {2, 1}, {0, 1}}));
    CHECK_FALSE(is_rectangular({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}));
    CHECK_FALSE(is_rectangular({{0, 0}, {2, 0}, {1, 1}}));
  }

  TEST_CASE("door candidates attach only near a wall and axis-aligned") {
    const Taxonomy& t = Taxonomy::builtin();
    json room = room_json(0, 4, 4, false);
    room["door_candidates"] = json::array({object_json("door", 0, 0.9, 0.05, 2.0, 0.1),
                                           object_json("door", 0, 0.9, 0.05, 2.0, 1.5),
                                           object_json("door", 0.3, 0.9, 0.05, 2.0, 0.0)});
    json doc = {{"version", 1}, {"rooms", json::array({room})}};
    ImportReport rep;
    const Corpus c = import_corpus(doc, t, {}, &rep);
    REQUIRE(c.train.size() == 1);
    CHECK(rep.doors_attached == 1);
    CHECK(rep.doors_rejected == 2);
    int doors = 0;
    for (const auto& o : c.train[0].objects) doors += t.has(o.category, Role::kDoor) ? 1 : 0;
    CHECK(doors == 1);
    CHECK(wall_distance(obj(t, "door", 0, 0.9, 0.05, 2.0, 0.1), 4, 4) == doctest::Approx(0.1));
  }

  TEST_CASE("unknown categories are dropped or rejected; grouping maps names") {
    const Taxonomy& t = Taxonomy::builtin();
    json room = room_json(0, 4, 4, false);
    room["objects"].push_back(object_json("spaceship", 0, 1, 1, 1, 1));
    room["objects"].push_back(object_json("King-size Bed", 0, 1.8, 2.0, 2, 1.5));
    const json doc = {{"version", 1}, {"rooms", json::array({room})}};
    ImportReport rep;
    ImportOptions opt;
    opt.grouping = GroupingMap::load(std::string(LAYOUTLAB_CONFIG_DIR) + "/grouping.json");
    const Corpus c = import_corpus(doc, t, opt, &rep);
    CHECK(rep.objects_dropped_unknown == 1);
    CHECK(rep.objects_regrouped == 1);
    REQUIRE(c.train.size() == 1);
    CHECK(c.train[0].objects.size() == 4);
    opt.reject_unknown = true;
    CHECK_THROWS_AS(import_corpus(doc, t, opt), ParseError);
    CHECK_THROWS_AS(import_corpus(json{{"version", 99}, {"rooms", json::array()}}, t), ParseError);
    CHECK_THROWS_AS(import_corpus(json{{"rooms", json::array()}}, t), ParseError);
  }

  TEST_CASE("splits and export round trip") {
    const Taxonomy& t = Taxonomy::builtin();
    json doc = {{"version", 1}, {"rooms", json::array()}};
    for (int i = 0; i < 4; ++i) {
      json r = room_json(i, 4, 3.5 + 0.1 * i, false);
      if (i == 1) r["split"] = "test";
      if (i == 2) r["split"] = "validation";
      doc["rooms"].push_back(r);
    }
    const Corpus c = import_corpus(doc, t);
    CHECK(c.train.size() == 2);
    CHECK(c.validation.size() == 2);
    const Corpus back = import_corpus(export_corpus(c, t), t);
    CHECK(back == c);
    CHECK(export_corpus(back, t) == export_corpus(c, t));
    doc["rooms"][0]["split"] = "holdout";
    CHECK_THROWS_AS(import_corpus(doc, t), ParseError);
  }

  TEST_CASE("augmentation examples") {
    const Taxonomy& t = Taxonomy::builtin();
    Layout l = room_only(t, 4, 4);
    l.objects.push_back(centered(t, "nightstand", 0, 0.5, 0.4, 1.0, 1.0));
    l.objects.push_back(centered(t, "desk", kPi / 2, 1.2, 0.6, 3.0, 2.0));
    l.objects.push_back(centered(t, "tv_stand", 0, 1.5, 0.4, 2.0, 3.5));

    AugmentRules all;
    all.lamp_on_stand = 1.0;
    all.computer_on_desk = 1.0;
    const Layout a = augment(l, t, all, 3);
    REQUIRE(a.objects.size() == 7);
    const FurnObj& lamp = a.objects[4];
    CHECK(lamp.category == t.id_of("indoor_lamp"));
    CHECK(lamp.width == doctest::Approx(0.3));
    CHECK(center_of(lamp).x == doctest::Approx(1.0));
    CHECK(center_of(lamp).y == doctest::Approx(1.0));
    const FurnObj& pc = a.objects[5];
    CHECK(pc.category == t.id_of("computer"));
    CHECK(pc.orientation == doctest::Approx(kPi / 2));
    CHECK(center_of(pc).x == doctest::Approx(3.0));
    const FurnObj& tv = a.objects[6];
    CHECK(tv.category == t.id_of("tv"));
    CHECK(tv.width == doctest::Approx(1.2));

    AugmentRules none;
    none.lamp_on_stand = 0.0;
    none.computer_on_desk = 0.0;
    none.tv_on_tv_stand = 0.0;
    CHECK(augment(l, t, none, 3) == l);
    CHECK(augment(l, t, {}, 9) == augment(l, t, {}, 9));

    Layout full = room_only(t, 5, 5);
    for (int i = 0; i < 20; ++i) full.objects.push_back(centered(t, "nightstand", 0, 0.4, 0.4, 0.3 + 0.2 * i, 1));
    CHECK(augment(full, t, all, 1).objects.size() == 21);
    AugmentRules bad;
    bad.lamp_on_stand = 1.5;
    CHECK_THROWS_AS(augment(l, t, bad, 0), InputError);
  }

  TEST_CASE("synthetic corpus") {
    const Taxonomy& t = Taxonomy::builtin();
    const Corpus c = synth_corpus(500, "bedroom", 7, t);
    CHECK(c.size() == 500);
    CHECK(c.validation.size() == 50);
    CHECK(c.bounds == synth_bounds("bedroom"));
    bool low = false, high = false;
    for (const Layout& l : c.train) {
      CHECK(validate(l, t).empty());
      CHECK(l.room_type == "bedroom");
      const double w = activity_costs(l, t).weight_score;
      low = low || w <= 0.3;
      high = high || w >= 0.6;
    }
    CHECK(low);
    CHECK(high);
    CHECK(synth_corpus(20, "bedroom", 7, t) == synth_corpus(20, "bedroom", 7, t));
    CHECK_FALSE(synth_corpus(20, "bedroom", 7, t) == synth_corpus(20, "bedroom", 8, t));
    const Corpus mixed = synth_corpus(40, "mixed", 1, t);
    CHECK(mixed.room_types() == std::vector<std::string>{"bedroom", "livingroom"});
    CHECK(mixed.only_type("livingroom").size() == 20);
    CHECK(mixed.only_type("livingroom").bounds == mixed.bounds);
    CHECK_THROWS_AS(synth_corpus(10, "kitchen", 1, t), InputError);
  }
}
