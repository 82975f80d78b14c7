#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "layoutlab/error.hpp"
#include "layoutlab/model.hpp"
#include "layoutlab/optim.hpp"

using namespace layoutlab;

namespace {

ModelConfig tiny(double dropout = 0.0) {
  ModelConfig c;
  c.layers = 2;
  c.heads = 2;
  c.embed = 16;
  c.vocab = 20;
  c.context = 18;
  c.dropout = dropout;
  c.seed = 42;
  return c;
}

struct Seq {
  std::vector<int> tokens, positions, indices;
};

Seq random_seq(std::mt19937_64& rng, int n, int vocab) {
  Seq s;
  std::uniform_int_distribution<int> tok(0, vocab - 1);
  for (int k = 0; k < n; ++k) {
    s.tokens.push_back(tok(rng));
    s.positions.push_back(k + 1);
    s.indices.push_back(k % 6 + 1);
  }
  return s;
}

template <class M>
void randomize(M& m, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& p : m.parameters()) p = static_cast<typename std::decay_t<decltype(p)>>(n(rng));
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("config validation and profiles") {
    CHECK(ModelConfig::desk().layers == 4);
    CHECK(ModelConfig::desk().heads == 4);
    CHECK(ModelConfig::desk().embed == 128);
    CHECK(ModelConfig::paper().layers == 12);
    CHECK(ModelConfig::paper().heads == 8);
    CHECK(ModelConfig::paper().embed == 256);
    CHECK(ModelConfig::desk().vocab == 258);
    CHECK(ModelConfig::desk().context == 127);
    ModelConfig bad = tiny();
    bad.heads = 3;
    CHECK_THROWS_AS(bad.check(), InputError);
    CHECK(ModelConfig::from_json(tiny().to_json()) == tiny());
  }

  TEST_CASE("rows are probability vectors") {
    Model m(tiny());
    std::mt19937_64 rng(1);
    const Seq s = random_seq(rng, 18, 20);
    const Model::Matrix p = m.probabilities(s.tokens, s.positions, s.indices);
    REQUIRE(p.rows() == 18);
    REQUIRE(p.cols() == 20);
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      CHECK(std::abs(p.row(r).sum() - 1.0f) < 1e-6);
      CHECK(p.row(r).minCoeff() >= 0.0f);
    }
  }

  TEST_CASE("causality: later tokens do not affect earlier outputs") {
    Model m(tiny());
    randomize(m, 7, 0.2);
    std::mt19937_64 rng(2);
    Seq s = random_seq(rng, 16, 20);
    Model::Activations a, b;
    m.forward(s.tokens, s.positions, s.indices, a);
    for (int k : {3, 9, 15}) {
      Seq t = s;
      t.tokens[static_cast<std::size_t>(k)] = (t.tokens[static_cast<std::size_t>(k)] + 5) % 20;
      m.forward(t.tokens, t.positions, t.indices, b);
      for (int r = 0; r < k; ++r)
        CHECK(std::memcmp(a.logits.row(r).data(), b.logits.row(r).data(), sizeof(float) * 20) == 0);
      CHECK((a.logits.row(k) - b.logits.row(k)).norm() > 0.0f);
    }
  }

  TEST_CASE("determinism under the seed") {
    Model a(tiny()), b(tiny());
    CHECK(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
    ModelConfig other = tiny();
    other.seed = 43;
    Model c(other);
    CHECK_FALSE(std::equal(a.parameters().begin(), a.parameters().end(), c.parameters().begin()));
    std::mt19937_64 rng(3);
    const Seq s = random_seq(rng, 10, 20);
    const auto pa = a.probabilities(s.tokens, s.positions, s.indices);
    const auto pb = b.probabilities(s.tokens, s.positions, s.indices);
    CHECK(std::memcmp(pa.data(), pb.data(), sizeof(float) * static_cast<std::size_t>(pa.size())) == 0);
  }

  TEST_CASE("dropout masks follow the rng") {
    Model m(tiny(0.3));
    std::mt19937_64 rng(4);
    const Seq s = random_seq(rng, 12, 20);
    Model::Activations a, b, c;
    std::mt19937_64 r1(9), r2(9);
    m.forward(s.tokens, s.positions, s.indices, a, &r1);
    m.forward(s.tokens, s.positions, s.indices, b, &r2);
    m.forward(s.tokens, s.positions, s.indices, c);
    CHECK(a.logits == b.logits);
    CHECK(a.logits != c.logits);
    CHECK(a.dropout_applied);
    CHECK_FALSE(c.dropout_applied);
  }

  TEST_CASE("length and id validation") {
    Model m(tiny());
    std::mt19937_64 rng(5);
    Seq s = random_seq(rng, 19, 20);
    for (auto& p : s.positions) p = std::min(p, 18);
    Model::Activations a;
    CHECK_THROWS_AS(m.forward(s.tokens, s.positions, s.indices, a), InputError);
    Seq t = random_seq(rng, 4, 20);
    t.tokens[1] = 20;
    CHECK_THROWS_AS(m.forward(t.tokens, t.positions, t.indices, a), InputError);
  }

  TEST_CASE("embedding is the sum of three lookups") {
    Model m(tiny());
    randomize(m, 11, 0.5);
    const std::vector<int> tok = {3}, pos = {2}, idx = {4};
    const auto e = m.embed(tok, pos, idx);
    const auto wte = m.tensor("wte"), wpe = m.tensor("wpe"), wie = m.tensor("wie");
    const Model::RowVector expect = wte.row(3) + wpe.row(1) + wie.row(3);
    CHECK((e.row(0) - expect).norm() < 1e-6f);
    const auto e2 = m.embed(tok, std::vector<int>{5}, idx);
    CHECK((e.row(0) - e2.row(0)).norm() > 0.0f);
    for (const char* n : {"wte", "wpe", "wie"}) m.tensor(n).setZero();
    CHECK(m.embed(tok, pos, idx).norm() == 0.0f);
  }

  TEST_CASE("zero upstream gradient gives zero parameter gradients") {
    Model m(tiny());
    std::mt19937_64 rng(6);
    const Seq s = random_seq(rng, 10, 20);
    Model::Activations a;
    m.forward(s.tokens, s.positions, s.indices, a);
    m.zero_grad();
    m.backward(a, Model::Matrix::Zero(10, 20));
    for (float g : m.gradients()) CHECK(g == 0.0f);
  }

  TEST_CASE("parameter gradcheck on a tiny model") {
    using M = Transformer<double>;
    M m(tiny());
    randomize(m, 13, 0.3);
    std::mt19937_64 rng(7);
    const Seq s = random_seq(rng, 12, 20);
    M::Matrix w(12, 20);
    std::normal_distribution<double> n(0.0, 1.0);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = n(rng);
    // Loss = sum(w .* logits), so dLoss/dlogits = w.
    auto loss = [&](M& mm) {
      M::Activations a;
      mm.forward(s.tokens, s.positions, s.indices, a);
      return (a.logits.array() * w.array()).sum();
    };
    M::Activations acts;
    m.forward(s.tokens, s.positions, s.indices, acts);
    m.zero_grad();
    m.backward(acts, w);
    const std::vector<double> grad(m.gradients().begin(), m.gradients().end());

    std::uniform_int_distribution<std::size_t> pick(0, m.num_parameters() - 1);
    double worst = 0.0;
    int used = 0;
    while (used < 20) {
      const std::size_t i = pick(rng);
      const double h = 1e-5;
      const double orig = m.parameters()[i];
      m.parameters()[i] = orig + h;
      const double up = loss(m);
      m.parameters()[i] = orig - h;
      const double dn = loss(m);
      m.parameters()[i] = orig;
      const double fd = (up - dn) / (2 * h);
      if (std::abs(fd) < 1e-6 && std::abs(grad[i]) < 1e-6) continue;  // unused slot (e.g. unseen token row)
      worst = std::max(worst, std::abs(fd - grad[i]) / std::max(std::abs(fd), std::abs(grad[i])));
      ++used;
    }
    CHECK(worst < 1e-3);
  }

  TEST_CASE("cached incremental decoding matches the full forward pass") {
    Model m(tiny());
    randomize(m, 17, 0.2);
    std::mt19937_64 rng(8);
    const Seq s = random_seq(rng, 14, 20);
    Model::Activations a;
    m.forward(s.tokens, s.positions, s.indices, a);
    Model::KvCache c1 = m.make_cache(), c2 = m.make_cache();
    Model::KvCache* caches[2] = {&c1, &c2};
    for (std::size_t k = 0; k < s.tokens.size(); ++k) {
      const std::vector<int> tok = {s.tokens[k], s.tokens[k]}, idx = {s.indices[k], s.indices[k]};
      const Model::Matrix out = m.step(tok, idx, caches);
      CHECK((out.row(0) - a.logits.row(static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff() < 1e-4f);
      CHECK(out.row(0) == out.row(1));
    }
    CHECK(c1.length == 14);
  }

  TEST_CASE("checkpoint round trip is bit-exact") {
    Model m(tiny());
    randomize(m, 19, 0.1);
    m.metadata()["note"] = "round trip";
    const std::string path = std::string(LAYOUTLAB_TEST_TMP) + "/model_rt.ckpt";
    std::filesystem::create_directories(LAYOUTLAB_TEST_TMP);
    m.save(path);
    const Model back = Model::load(path);
    CHECK(back.config() == m.config());
    CHECK(back.metadata() == m.metadata());
    REQUIRE(back.num_parameters() == m.num_parameters());
    CHECK(std::memcmp(back.parameters().data(), m.parameters().data(), sizeof(float) * m.num_parameters()) == 0);
    std::mt19937_64 rng(9);
    const Seq s = random_seq(rng, 9, 20);
    const auto p1 = m.probabilities(s.tokens, s.positions, s.indices);
    const auto p2 = back.probabilities(s.tokens, s.positions, s.indices);
    CHECK(std::memcmp(p1.data(), p2.data(), sizeof(float) * static_cast<std::size_t>(p1.size())) == 0);

    std::stringstream junk("not a checkpoint at all");
    CHECK_THROWS_AS(Model::read(junk), ParseError);
  }

  TEST_CASE("tensor views address the flat buffer") {
    Model m(tiny());
    const auto names = m.tensor_names();
    std::size_t total = 0;
    for (const auto& n : names) total += static_cast<std::size_t>(m.tensor(n).size());
    CHECK(total == m.num_parameters());
    CHECK(m.tensor("head.w").rows() * m.tensor("head.w").cols() == 16 * 20);
    CHECK_THROWS_AS(m.tensor("nope"), InputError);
  }

  TEST_CASE("adam and gradient clipping") {
    std::vector<float> p = {1.0f, -2.0f}, g = {3.0f, 4.0f};
    CHECK(grad_norm(std::span<const float>(g)) == doctest::Approx(5.0));
    const double pre = clip_grad_norm(std::span<float>(g), 1.0);
    CHECK(pre == doctest::Approx(5.0));
    CHECK(g[0] == doctest::Approx(0.6));
    CHECK(g[1] == doctest::Approx(0.8));
    Adam adam(2, {});
    adam.step(std::span<float>(p), std::span<const float>(g), 0.1);
    // First bias-corrected Adam step moves each weight by lr against the sign.
    CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(-2.1).epsilon(1e-6));
  }
}
