#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "helpers.hpp"
#include "layoutlab/error.hpp"
#include "layoutlab/synth_corpus.hpp"
#include "layoutlab/trainer.hpp"

using namespace layoutlab;
using namespace testing;

namespace {

ModelConfig tiny_model() {
  ModelConfig c;
  c.layers = 1;
  c.heads = 2;
  c.embed = 16;
  c.dropout = 0.0;
  c.seed = 3;
  return c;
}

TrainConfig quick(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 16;
  c.lr = 1e-3;
  c.seed = 5;
  return c;
}

Corpus bedrooms(int n) {
  SynthOptions o;
  o.validation_fraction = 0.0;
  return synth_corpus(n, "bedroom", 17, Taxonomy::builtin(), o);
}

std::vector<double> random_probs(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> p(static_cast<std::size_t>(n));
  double s = 0.0;
  for (double& v : p) s += (v = u(rng));
  for (double& v : p) v /= s;
  return p;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("cross-entropy examples") {
    ProbMatrix certain = ProbMatrix::Zero(2, 4);
    certain(0, 1) = 1.0;
    certain(1, 3) = 1.0;
    const std::vector<int> t = {1, 3};
    const std::vector<char> all = {1, 1};
    CHECK(cross_entropy_loss(certain, t, all) == 0.0);

    const ProbMatrix uniform = ProbMatrix::Constant(3, 258, 1.0 / 258.0);
    const std::vector<int> t3 = {0, 100, 257};
    const std::vector<char> m3 = {1, 1, 1};
    CHECK(cross_entropy_loss(uniform, t3, m3) == doctest::Approx(std::log(258.0)).epsilon(1e-12));

    ProbMatrix g;
    const std::vector<char> none = {0, 0, 0};
    CHECK(cross_entropy_loss(uniform, t3, none, &g) == 0.0);
    CHECK(g.cwiseAbs().maxCoeff() == 0.0);

    ProbMatrix p(2, 3);
    p << 0.2, 0.5, 0.3, 0.1, 0.1, 0.8;
    const std::vector<int> tp = {1, 2};
    const double l = cross_entropy_loss(p, tp, all, &g);
    CHECK(l == doctest::Approx(-(std::log(0.5) + std::log(0.8)) / 2).epsilon(1e-12));
    ProbMatrix expect = p / 2.0;
    expect(0, 1) -= 0.5;
    expect(1, 2) -= 0.5;
    CHECK((g - expect).cwiseAbs().maxCoeff() < 1e-15);
    const std::vector<int> wrong = {1};
    CHECK_THROWS_AS(cross_entropy_loss(p, wrong, all), InputError);
  }

  TEST_CASE("window expectation examples") {
    std::vector<double> one(256, 0.0);
    one[42] = 1.0;
    const WindowExpectation a = window_expectation(one, 8.0, 256);
    CHECK(a.mode == 42);
    CHECK(a.value == doctest::Approx(42.0));

    std::vector<double> sym(256, 0.0);
    sym[50] = 0.5;
    sym[46] = 0.25;
    sym[54] = 0.25;
    CHECK(window_expectation(sym, 8.0, 256).value == doctest::Approx(50.0).epsilon(1e-12));

    std::vector<double> two(256, 0.0);
    two[100] = 0.5;
    two[108] = 0.5;
    const WindowExpectation b = window_expectation(two, 8.0, 256);
    CHECK(b.mode == 100);
    const double w = std::exp(-0.5);
    CHECK(b.value == doctest::Approx((100 * 0.5 + 108 * 0.5 * w) / (0.5 + 0.5 * w)).epsilon(1e-12));
    CHECK(b.value == doctest::Approx(103.02).epsilon(1e-4));

    // Special tokens past the support do not enter the window.
    std::vector<double> pad(258, 0.0);
    pad[256] = 0.9;
    pad[10] = 0.1;
    const WindowExpectation c = window_expectation(pad, 8.0, 256);
    CHECK(c.mode == 10);
    CHECK(c.grad[256] == 0.0);
    CHECK_THROWS_AS(window_expectation(pad, 0.0, 256), InputError);
  }

  TEST_CASE("window expectation gradient matches finite differences") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> p = random_probs(rng, 64);
      p[20] += 0.5;  // clear mode so small steps keep it fixed
      const WindowExpectation we = window_expectation(p, 4.0);
      for (std::size_t j = 0; j < p.size(); j += 7) {
        std::vector<double> up = p, dn = p;
        up[j] += 1e-6;
        dn[j] -= 1e-6;
        const double fd = (window_expectation(up, 4.0).value - window_expectation(dn, 4.0).value) / 2e-6;
        CHECK(std::abs(fd - we.grad[j]) < 1e-6);
      }
    }
  }

  TEST_CASE("softmax Jacobian matches finite differences") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0, 1);
    std::vector<double> z(12), c(12);
    for (double& v : z) v = n(rng);
    for (double& v : c) v = n(rng);
    auto soft = [](const std::vector<double>& x) {
      std::vector<double> p(x.size());
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) s += (p[i] = std::exp(x[i]));
      for (double& v : p) v /= s;
      return p;
    };
    auto f = [&](const std::vector<double>& x) {
      const auto p = soft(x);
      double v = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i) v += c[i] * p[i];
      return v;
    };
    const std::vector<double> g = probs_to_logits_grad(soft(z), c);
    for (std::size_t i = 0; i < z.size(); ++i) {
      auto up = z, dn = z;
      up[i] += 1e-6;
      dn[i] -= 1e-6;
      CHECK(std::abs((f(up) - f(dn)) / 2e-6 - g[i]) < 1e-8);
    }
  }

  TEST_CASE("expert token loss") {
    const Taxonomy& t = Taxonomy::builtin();
    const ExemptPairs ex = ExemptPairs::defaults(t);
    const Corpus corpus = bedrooms(6);
    const CodecConfig codec = CodecConfig::for_taxonomy(t, corpus.bounds);
    const Expert expert{ExpertKind::kErgonomic, &t, &ex, {}};
    const auto samples = build_samples(corpus.train, 1, codec, expert, {});
    REQUIRE(!samples.empty());
    std::mt19937_64 rng(3);
    int checked = 0;
    for (const TrainingSample& s : samples) {
      REQUIRE(!s.slots.empty());
      const double gt = expert.score(s.layout);
      for (const SlotRef& slot : s.slots) {
        std::vector<double> onehot(258, 0.0);
        onehot[static_cast<std::size_t>(s.seq.tokens[static_cast<std::size_t>(slot.offset)])] = 1.0;
        const ExpertTokenLoss e = expert_token_loss(s, slot.offset, onehot, expert, 8.0, 256);
        CHECK(e.applied);
        CHECK(e.value == doctest::Approx(gt).epsilon(1e-9));
      }
      CHECK_FALSE(expert_token_loss(s, kTupleSize, std::vector<double>(258, 1.0 / 258), expert, 8.0, 256).applied);

      // Gradient with respect to P on a peaked random distribution.
      const SlotRef& slot = s.slots[s.slots.size() / 2];
      std::vector<double> p = random_probs(rng, 258);
      const int tok = s.seq.tokens[static_cast<std::size_t>(slot.offset)];
      p[static_cast<std::size_t>(tok)] += 2.0;
      const ExpertTokenLoss e = expert_token_loss(s, slot.offset, p, expert, 8.0, 256);
      for (int j = tok - 6; j <= tok + 6; j += 3) {
        if (j < 0 || j >= 256) continue;
        auto up = p, dn = p;
        up[static_cast<std::size_t>(j)] += 1e-6;
        dn[static_cast<std::size_t>(j)] -= 1e-6;
        const double fd = (expert_token_loss(s, slot.offset, up, expert, 8.0, 256).value -
                           expert_token_loss(s, slot.offset, dn, expert, 8.0, 256).value) / 2e-6;
        CHECK(rel_err(e.dprobs[static_cast<std::size_t>(j)], fd) < 1e-3);
        ++checked;
      }
    }
    CHECK(checked > 10);
  }

  TEST_CASE("variant loss weights") {
    CHECK(variant_weights(Variant::kV0, 0.3).text == 1.0);
    CHECK(variant_weights(Variant::kV0, 0.3).expert == 0.0);
    CHECK(variant_weights(Variant::kV1, 0.3).text == doctest::Approx(0.7));
    CHECK(variant_weights(Variant::kV1, 0.3).expert == 0.0);
    CHECK(variant_weights(Variant::kV2, 0.3).text == 1.0);
    CHECK(variant_weights(Variant::kV2, 0.3).expert == 1.0);
    CHECK(variant_weights(Variant::kV3, 0.3).text == doctest::Approx(0.7));
    CHECK(variant_weights(Variant::kV3, 0.3).expert == doctest::Approx(0.3));
    for (Variant v : {Variant::kV0, Variant::kV1, Variant::kV2, Variant::kV3})
      CHECK(variant_from_name(variant_name(v)) == v);
    CHECK_THROWS(variant_from_name("V9"));
  }

  TEST_CASE("V1 scales the text loss by one minus the weight score") {
    const Taxonomy& t = Taxonomy::builtin();
    const ExemptPairs ex = ExemptPairs::defaults(t);
    const Corpus corpus = bedrooms(4);
    const CodecConfig codec = CodecConfig::for_taxonomy(t, corpus.bounds);
    const Expert expert{ExpertKind::kErgonomic, &t, &ex, {}};
    const auto samples = build_samples(corpus.train, 1, codec, expert, {});
    const Model m(tiny_model());
    Model::Activations acts;
    Model::Matrix d0, d1, d2;
    for (const auto& s : samples) {
      const SampleLoss l0 = sample_loss(m, s, Variant::kV0, expert, 8.0, acts, nullptr, &d0);
      const SampleLoss l1 = sample_loss(m, s, Variant::kV1, expert, 8.0, acts, nullptr, &d1);
      CHECK(l1.total == doctest::Approx((1.0 - s.weight_score) * l0.total).epsilon(1e-12));
      CHECK((d1 - static_cast<float>(1.0 - s.weight_score) * d0).cwiseAbs().maxCoeff() < 1e-6f);
      const SampleLoss l2 = sample_loss(m, s, Variant::kV2, expert, 8.0, acts, nullptr, &d2);
      CHECK(l2.total == doctest::Approx(l0.text + l2.expert).epsilon(1e-12));
    }
  }

  TEST_CASE("learning-rate schedule") {
    const Schedule s{1e-3, 10, 110};
    CHECK(lr_at(0, s) == 0.0);
    CHECK(lr_at(5, s) == doctest::Approx(5e-4));
    CHECK(lr_at(10, s) == doctest::Approx(1e-3));
    CHECK(lr_at(60, s) == doctest::Approx(5e-4));
    CHECK(lr_at(110, s) == 0.0);
    CHECK(lr_at(500, s) == 0.0);
    CHECK(lr_at(3, {1e-3, 0, 10}) == doctest::Approx(7e-4));
    CHECK_THROWS_AS(lr_at(-1, s), InputError);
  }

  TEST_CASE("geometric slots skip the room and wall elements") {
    const Taxonomy& t = Taxonomy::builtin();
    Layout l = room_only(t, 4, 4);
    l.objects.push_back(obj(t, "window", 0, 1, 0.05, 1, 0));
    l.objects.push_back(obj(t, "double_bed", 0, 1.6, 2, 1, 1));
    l.objects.push_back(obj(t, "nightstand", 0, 0.4, 0.4, 0.5, 1));
    const auto slots = geometric_slots(l, t);
    REQUIRE(slots.size() == 10);
    CHECK(slots[0].offset == 13);
    CHECK(slots[0].object == 2);
    CHECK(slots[0].attr == Attr::kOrientation);
    CHECK(slots[9].offset == 23);
    CHECK(slots[9].attr == Attr::kY);
  }

  TEST_CASE("samples decode to what they encode") {
    const Taxonomy& t = Taxonomy::builtin();
    const ExemptPairs ex = ExemptPairs::defaults(t);
    const Corpus corpus = bedrooms(10);
    const CodecConfig codec = CodecConfig::for_taxonomy(t, corpus.bounds);
    const Expert expert{ExpertKind::kErgonomic, &t, &ex, {}};
    const auto samples = build_samples(corpus.train, 3, codec, expert, {});
    CHECK(samples.size() == 30);
    for (const auto& s : samples) {
      CHECK(s.seq.tokens.back() == codec.stop_token());
      CHECK(encode(s.layout, codec).tokens[s.seq.size() - 1] == codec.stop_token());
      CHECK(s.weight_score >= 0.0);
      CHECK(s.weight_score <= 1.0);
      CHECK(s.slots.size() % 5 == 0);
    }
  }

  TEST_CASE("every sample is visited once per epoch") {
    const Taxonomy& t = Taxonomy::builtin();
    const ExemptPairs ex = ExemptPairs::defaults(t);
    const Corpus corpus = bedrooms(100);
    REQUIRE(corpus.train.size() == 100);
    const CodecConfig codec = CodecConfig::for_taxonomy(t, corpus.bounds);
    TrainConfig cfg = quick(10);
    cfg.batch_size = 64;
    int epochs_seen = 0;
    const TrainResult r = train(corpus, codec, t, ex, tiny_model(), cfg, Variant::kV0,
                                {[&](const EpochMetrics&) { ++epochs_seen; }});
    CHECK(r.sample_visits == 8000);
    CHECK(epochs_seen == 10);
    CHECK(r.history.size() == 10);
    CHECK(r.history.back().train_loss < r.history.front().train_loss);
    CHECK(r.best_epoch == 10);
    REQUIRE(r.best.has_value());
    CHECK(codec_of(*r.best) == codec);
  }

  TEST_CASE("training is deterministic under the seed") {
    const Taxonomy& t = Taxonomy::builtin();
    const ExemptPairs ex = ExemptPairs::defaults(t);
    const Corpus corpus = bedrooms(12);
    const CodecConfig codec = CodecConfig::for_taxonomy(t, corpus.bounds);
    ModelConfig mc = tiny_model();
    mc.dropout = 0.1;
    TrainConfig cfg = quick(1);
    cfg.augment_draws = 2;
    const TrainResult a = train(corpus, codec, t, ex, mc, cfg, Variant::kV3);
    const TrainResult b = train(corpus, codec, t, ex, mc, cfg, Variant::kV3);
    REQUIRE(a.last.has_value());
    REQUIRE(b.last.has_value());
    CHECK(std::memcmp(a.last->parameters().data(), b.last->parameters().data(),
                      sizeof(float) * a.last->num_parameters()) == 0);
    CHECK(a.history[0].train_loss == b.history[0].train_loss);
  }

  TEST_CASE("train config validation and JSON") {
    TrainConfig c = quick(3);
    CHECK(TrainConfig::from_json(c.to_json()).to_json() == c.to_json());
    c.batch_size = 0;
    CHECK_THROWS_AS(c.check(), InputError);
    CHECK(TrainConfig{}.sigma(256) == 8.0);
  }
}
