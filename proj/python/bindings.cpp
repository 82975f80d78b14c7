// Python bindings. Layouts cross the boundary as interchange JSON text; the
// Python package wraps these in dicts.

#include <random>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "layoutlab/codec.hpp"
#include "layoutlab/error.hpp"
#include "layoutlab/ergo.hpp"
#include "layoutlab/generate.hpp"
#include "layoutlab/geom.hpp"
#include "layoutlab/json_io.hpp"
#include "layoutlab/sampler.hpp"
#include "layoutlab/svg.hpp"
#include "layoutlab/synth_corpus.hpp"
#include "layoutlab/trainer.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace layoutlab;

namespace {

const Taxonomy& tax() { return Taxonomy::builtin(); }

Layout parse_room(const std::string& text) { return layout_from_json(json::parse(text), tax(), "room"); }

json gradient_json(const std::vector<std::array<double, kNumAttrs>>& g) {
  json out = json::array();
  for (const auto& row : g) out.push_back(std::vector<double>(row.begin(), row.end()));
  return out;
}

std::string score(const std::string& room) {
  const Layout l = parse_room(room);
  const ErgoReport r = scene_score_grad(l, tax());
  json acts = json::object();
  for (int a = 0; a < kNumActivities; ++a) {
    const auto& s = r.activity[static_cast<std::size_t>(a)];
    const auto& u = r.activity_unscaled[static_cast<std::size_t>(a)];
    acts[activity_name(static_cast<Activity>(a))] = {{"scaled", s ? json(*s) : json(nullptr)},
                                                      {"unscaled", u ? json(*u) : json(nullptr)}};
  }
  return json{{"score", r.score}, {"weight_score", r.weight_score}, {"activities", acts},
              {"gradient", gradient_json(r.gradient)}}
      .dump();
}

std::string intersection(const std::string& room) {
  const Layout l = parse_room(room);
  const ExemptPairs ex = ExemptPairs::defaults(tax());
  const IntersectionReport r = scene_intersection_loss_grad(l, ex);
  return json{{"loss", r.loss}, {"gradient", gradient_json(r.gradient)}}.dump();
}

std::string codec_for(double w_min, double w_max, double d_min, double d_max, int resolution) {
  return codec_to_json(CodecConfig::for_taxonomy(tax(), {w_min, w_max, d_min, d_max}, resolution)).dump();
}

std::vector<int> encode_layout(const std::string& room, const std::string& codec) {
  return encode(parse_room(room), codec_from_json(json::parse(codec))).tokens;
}

std::string decode_tokens(const std::vector<int>& tokens, const std::string& codec) {
  return layout_to_json(decode(tokens, codec_from_json(json::parse(codec))), tax()).dump();
}

std::string synth(int n, const std::string& type, std::uint64_t seed) {
  return export_corpus(synth_corpus(n, type, seed, tax()), tax()).dump();
}

std::string svg(const std::string& room) { return render_svg(parse_room(room), tax()); }

int sample(const std::vector<double>& probs, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return nucleus_sample(probs, p, rng);
}

std::string generate_scenes(const std::string& checkpoint, int n, std::uint64_t seed, double top_p,
                            bool collision_checks, int threads) {
  const Model model = Model::load(checkpoint);
  const CodecConfig codec = codec_of(model);
  const ExemptPairs ex = ExemptPairs::defaults(tax());
  SamplerConfig cfg;
  cfg.top_p = top_p;
  cfg.collision_checks = collision_checks;
  cfg.check();
  std::vector<GeneratedScene> scenes;
  {
    py::gil_scoped_release release;
    scenes = generate_many({model, codec, tax(), ex}, cfg, n, seed, threads);
  }
  std::vector<Layout> ok;
  int failed = 0;
  for (const auto& s : scenes) {
    if (s.failed)
      ++failed;
    else
      ok.push_back(s.layout);
  }
  json doc = scenes_to_json(ok, tax());
  doc["failed"] = failed;
  return doc.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "layoutlab native core";
  m.attr("__version__") = LAYOUTLAB_VERSION;

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<MalformedSequence>(m, "MalformedSequence", PyExc_ValueError);
  py::register_exception<GenerationFailure>(m, "GenerationFailure", PyExc_RuntimeError);

  m.def("categories", [] {
    std::vector<std::string> out;
    for (int i = 0; i < tax().size(); ++i) out.push_back(tax().at(i).name);
    return out;
  });
  m.def("score", &score, py::arg("room"));
  m.def("intersection", &intersection, py::arg("room"));
  m.def("codec_for", &codec_for, py::arg("w_min"), py::arg("w_max"), py::arg("d_min"), py::arg("d_max"),
        py::arg("resolution") = 256);
  m.def("encode", &encode_layout, py::arg("room"), py::arg("codec"));
  m.def("decode", &decode_tokens, py::arg("tokens"), py::arg("codec"));
  m.def("synth_corpus", &synth, py::arg("n"), py::arg("room_type"), py::arg("seed"));
  m.def("render_svg", &svg, py::arg("room"));
  m.def("nucleus_set", [](const std::vector<double>& p, double top_p) { return nucleus_set(p, top_p); },
        py::arg("probs"), py::arg("p"));
  m.def("nucleus_sample", &sample, py::arg("probs"), py::arg("p"), py::arg("seed"));
  m.def("reach_cost", [](double px, double py_, double qx, double qy) { return reach_cost({px, py_}, {qx, qy}); });
  m.def("rescale", [](double e) { return rescale(e); });
  m.def("generate", &generate_scenes, py::arg("checkpoint"), py::arg("n"), py::arg("seed") = 0,
        py::arg("top_p") = 0.9, py::arg("collision_checks") = true, py::arg("threads") = 0);
}
