#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "layoutlab/error.hpp"
#include "layoutlab/generate.hpp"
#include "layoutlab/postprocess.hpp"
#include "layoutlab/sampler.hpp"
#include "layoutlab/svg.hpp"
#include "layoutlab/synth_corpus.hpp"

using namespace layoutlab;
using namespace testing;

namespace {

ModelConfig tiny_model() {
  ModelConfig c;
  c.layers = 1;
  c.heads = 2;
  c.embed = 16;
  c.dropout = 0.0;
  c.seed = 11;
  return c;
}

CodecConfig bedroom_codec() {
  return CodecConfig::for_taxonomy(Taxonomy::builtin(), synth_bounds("bedroom"));
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_SUITE("synth") {
  TEST_CASE("nucleus set example") {
    const std::vector<double> p = {0.5, 0.3, 0.15, 0.05};
    CHECK(nucleus_set(p, 0.9) == std::vector<int>{0, 1, 2});
    const auto d = nucleus_distribution(p, 0.9);
    CHECK(d[0] == doctest::Approx(0.5 / 0.95));
    CHECK(d[1] == doctest::Approx(0.3 / 0.95));
    CHECK(d[2] == doctest::Approx(0.15 / 0.95));
    CHECK(d[0] == doctest::Approx(0.5263).epsilon(1e-4));
    CHECK(d[1] == doctest::Approx(0.3158).epsilon(1e-4));
    CHECK(d[2] == doctest::Approx(0.1579).epsilon(1e-4));
    CHECK(d[3] == 0.0);
    CHECK(nucleus_set(p, 1.0).size() == 4);
    const std::vector<double> one = {0.0, 1.0, 0.0};
    CHECK(nucleus_set(one, 0.9) == std::vector<int>{1});
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) CHECK(nucleus_sample(one, 0.9, rng) == 1);
    const std::vector<double> tie = {0.25, 0.25, 0.25, 0.25};
    CHECK(nucleus_set(tie, 0.5) == std::vector<int>{0, 1});
    CHECK(argmax(tie) == 0);
  }

  TEST_CASE("nucleus sampling frequencies follow the renormalized distribution") {
    const std::vector<double> p = {0.5, 0.3, 0.15, 0.05};
    std::mt19937_64 rng(2);
    std::vector<int> hits(4, 0);
    const int n = 40000;
    for (int k = 0; k < n; ++k) ++hits[static_cast<std::size_t>(nucleus_sample(p, 0.9, rng))];
    CHECK(hits[3] == 0);
    CHECK(hits[0] / double(n) == doctest::Approx(0.5 / 0.95).epsilon(0.03));
    CHECK(hits[2] / double(n) == doctest::Approx(0.15 / 0.95).epsilon(0.05));
  }

  TEST_CASE("an untrained model still produces decodable scenes") {
    const Taxonomy& t = Taxonomy::builtin();
    const ExemptPairs ex = ExemptPairs::defaults(t);
    const CodecConfig codec = bedroom_codec();
    const Model m(tiny_model());
    const GenerationContext ctx{m, codec, t, ex};
    SamplerConfig cfg;
    cfg.collision_checks = false;
    const auto scenes = generate_many(ctx, cfg, 8, 3, 1);
    REQUIRE(scenes.size() == 8);
    for (const auto& s : scenes) {
      CHECK_FALSE(s.failed);
      CHECK(s.tokens.back() == codec.stop_token());
      CHECK(decode(s.tokens, codec) == s.layout);
      CHECK(validate(s.layout, t).empty());
    }
    // Independent of the thread count.
    const auto again = generate_many(ctx, cfg, 8, 3, 3);
    for (std::size_t i = 0; i < scenes.size(); ++i) CHECK(again[i].tokens == scenes[i].tokens);
  }

  TEST_CASE("lockstep and sequential generation agree") {
    const Taxonomy& t = Taxonomy::builtin();
    const ExemptPairs ex = ExemptPairs::defaults(t);
    const CodecConfig codec = bedroom_codec();
    const Model m(tiny_model());
    const GenerationContext ctx{m, codec, t, ex};
    SamplerConfig cfg;
    cfg.collision_checks = false;
    const auto batch = generate_many(ctx, cfg, 4, 9, 1);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      std::mt19937_64 rng(scene_seed(9, i));
      const GeneratedScene one = generate(ctx, cfg, rng);
      CHECK(one.tokens == batch[i].tokens);
    }
  }

  TEST_CASE("room-conditioned generation keeps the prefix") {
    const Taxonomy& t = Taxonomy::builtin();
    const ExemptPairs ex = ExemptPairs::defaults(t);
    const CodecConfig codec = bedroom_codec();
    const Model m(tiny_model());
    const GenerationContext ctx{m, codec, t, ex};
    const Layout room = synth_room("bedroom", 4, false, false, t);
    const std::vector<int> prefix = conditioning_prefix(room, codec, t);
    REQUIRE(prefix.size() % kTupleSize == 0);
    REQUIRE(prefix.size() >= 2 * kTupleSize);  // room plus at least a door
    SamplerConfig cfg;
    cfg.mode = GenerationMode::kRoomConditioned;
    cfg.collision_checks = false;
    std::mt19937_64 rng(5);
    const GeneratedScene s = generate(ctx, cfg, rng, &room);
    REQUIRE(s.tokens.size() >= prefix.size());
    CHECK(std::equal(prefix.begin(), prefix.end(), s.tokens.begin()));
    CHECK_THROWS_AS(generate(ctx, cfg, rng, nullptr), InputError);
  }

  TEST_CASE("collision checks bound overlaps in accepted scenes") {
    const Taxonomy& t = Taxonomy::builtin();
    const ExemptPairs ex = ExemptPairs::defaults(t);
    const CodecConfig codec = bedroom_codec();
    const Model m(tiny_model());
    const GenerationContext ctx{m, codec, t, ex};
    SamplerConfig cfg;
    cfg.restart_budget = 200;
    const auto scenes = generate_many(ctx, cfg, 6, 21, 1);
    int ok = 0;
    for (const auto& s : scenes) {
      if (s.failed) continue;
      ++ok;
      CHECK(max_overlap_ratio(s.layout, ex) <= cfg.area_ratio_threshold + 1e-9);
      for (std::size_t i = 1; i < s.layout.objects.size(); ++i) {
        Layout before = s.layout;
        before.objects.resize(i);
        CHECK(collision_check(before, s.layout.objects[i], ex, {cfg.area_ratio_threshold}));
      }
    }
    CHECK(ok > 0);
  }

  TEST_CASE("generation failure once the restart budget is spent") {
    const Taxonomy& t = Taxonomy::builtin();
    const ExemptPairs ex = ExemptPairs::defaults(t);
    const CodecConfig codec = bedroom_codec();
    Model m(tiny_model());
    // Every geometric slot prefers token 200 (huge, far right) and the stop
    // token is effectively banned, so objects keep landing on top of each other.
    m.tensor("head.w").setZero();
    auto b = m.tensor("head.b");
    b.setZero();
    b(0, 200) = 30.0f;
    b(0, codec.stop_token()) = -30.0f;
    const GenerationContext ctx{m, codec, t, ex};
    SamplerConfig cfg;
    cfg.restart_budget = 2;
    cfg.resample_limit = 2;
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(generate(ctx, cfg, rng), GenerationFailure);
    const auto many = generate_many(ctx, cfg, 2, 1, 1);
    CHECK(many[0].failed);
    CHECK(many[0].stats.restarts == cfg.restart_budget);
  }

  TEST_CASE("post-processing places objects vertically") {
    const Taxonomy& t = Taxonomy::builtin();
    Layout l = room_only(t, 4, 4);
    l.objects.push_back(centered(t, "nightstand", 0, 0.5, 0.5, 1.0, 1.0));
    l.objects.push_back(centered(t, "indoor_lamp", 0, 0.2, 0.2, 1.05, 1.0));
    l.objects.push_back(centered(t, "window", 0, 1.0, 0.05, 2.0, 0.025));
    l.objects.push_back(centered(t, "ceiling_lamp", 0, 0.4, 0.4, 2.0, 2.0));
    l.objects.push_back(centered(t, "computer", 0, 0.3, 0.2, 3.5, 3.5));  // nothing underneath
    const HeightRules rules = HeightRules::defaults();
    const PlacedScene p = post_process(l, t, rules);
    REQUIRE(p.objects.size() == 6);
    CHECK(p.objects[1].z == 0.0);
    CHECK(p.objects[2].support == 1);
    CHECK(p.objects[2].z == doctest::Approx(rules.height_of("nightstand")));
    CHECK(p.objects[3].z == doctest::Approx(0.9));
    CHECK(p.objects[4].z == doctest::Approx(2.5));
    CHECK(p.objects[5].support == -1);
    CHECK(p.objects[5].z == 0.0);
    CHECK(p.to_json()["objects"].size() == 6);
    const HeightRules shipped = HeightRules::load(std::string(LAYOUTLAB_CONFIG_DIR) + "/heights.json");
    CHECK(shipped.height_of("wardrobe") == rules.height_of("wardrobe"));
    CHECK(rules.height_of("unknown") == rules.default_height);
  }

  TEST_CASE("svg rendering") {
    const Taxonomy& t = Taxonomy::builtin();
    Layout l = room_only(t, 4, 3);
    l.objects.push_back(centered(t, "double_bed", 0, 1.6, 2.0, 2.0, 1.5));
    l.objects.push_back(centered(t, "door", 0, 0.9, 0.05, 1.0, 0.025));
    const std::string svg = render_svg(l, t);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("width=\"440.000\" height=\"340.000\"") != std::string::npos);
    CHECK(count_of(svg, "<polygon") == 2);
    CHECK(count_of(svg, "<text") == 1);
    CHECK(svg.find(">double_bed</text>") != std::string::npos);
    CHECK(render_svg(l, t) == svg);
    SvgStyle plain;
    plain.labels = false;
    CHECK(count_of(render_svg(l, t, plain), "<text") == 0);
    const SvgTransform tf = svg_transform(l);
    CHECK(tf.px(0) == 20.0);
    CHECK(tf.py(0) == 320.0);
    CHECK(tf.py(3) == 20.0);
    CHECK_THROWS_AS(render_svg(Layout{}, t), InputError);
  }
}
