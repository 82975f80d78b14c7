#include "layoutlab/model.hpp"

#include <cmath>
#include <cstring>
#include <algorithm>
#include <fstream>

#include "layoutlab/error.hpp"

namespace layoutlab {

namespace {

constexpr char kMagic[4] = {'L', 'Y', 'L', 'B'};
constexpr std::uint32_t kFormatVersion = 1;

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)

template <typename T>
T gelu(T x) {
  return T(0.5) * x * (T(1) + std::tanh(T(kGeluC) * (x + T(0.044715) * x * x * x)));
}

template <typename T>
T gelu_grad(T x) {
  const T inner = T(kGeluC) * (x + T(0.044715) * x * x * x);
  const T t = std::tanh(inner);
  const T dinner = T(kGeluC) * (T(1) + T(3 * 0.044715) * x * x);
  return T(0.5) * (T(1) + t) + T(0.5) * x * (T(1) - t * t) * dinner;
}

// Row-wise layer norm; records normalized input and reciprocal std.
template <typename M, typename V, typename G>
void layer_norm(const M& x, const G& gamma, const G& beta, M& hat, V& rstd, M& out) {
  using T = typename M::Scalar;
  const auto n = x.cols();
  hat.resize(x.rows(), n);
  out.resize(x.rows(), n);
  rstd.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const T mean = x.row(r).mean();
    const T var = (x.row(r).array() - mean).square().mean();
    const T rs = T(1) / std::sqrt(var + T(1e-5));
    rstd(r) = rs;
    hat.row(r) = (x.row(r).array() - mean) * rs;
    out.row(r) = hat.row(r).cwiseProduct(gamma) + beta;
  }
}

template <typename M, typename V, typename G, typename GM>
M layer_norm_backward(const M& dout, const M& hat, const V& rstd, const G& gamma, GM dgamma, GM dbeta) {
  using T = typename M::Scalar;
  dgamma += dout.cwiseProduct(hat).colwise().sum();
  dbeta += dout.colwise().sum();
  M dx(dout.rows(), dout.cols());
  const T n = T(static_cast<double>(dout.cols()));
  for (Eigen::Index r = 0; r < dout.rows(); ++r) {
    const auto dhat = dout.row(r).cwiseProduct(gamma).eval();
    const T mean_d = dhat.sum() / n;
    const T mean_dh = dhat.cwiseProduct(hat.row(r)).sum() / n;
    dx.row(r) = rstd(r) * (dhat.array() - mean_d - hat.row(r).array() * mean_dh);
  }
  return dx;
}

template <typename M>
void fill_dropout(M& mask, Eigen::Index rows, Eigen::Index cols, double rate, std::mt19937_64& rng) {
  using T = typename M::Scalar;
  mask.resize(rows, cols);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const T keep = T(1.0 / (1.0 - rate));
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = u(rng) < rate ? T(0) : keep;
}

void check_ids(std::span<const int> ids, int lo, int hi, const char* what) {
  for (int v : ids)
    if (v < lo || v > hi) throw InputError(std::string(what) + " id out of range: " + std::to_string(v));
}

}  // namespace

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::paper() {
  ModelConfig c;
  c.layers = 12;
  c.heads = 8;
  c.embed = 256;
  return c;
}

void ModelConfig::check() const {
  if (layers < 1 || heads < 1 || embed < 1) throw InputError("model dimensions must be positive");
  if (embed % heads != 0) throw InputError("embedding width must be divisible by the head count");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InputError("dropout must be in [0, 1)");
  if (vocab < 3 || context < 2 || index_count < 1) throw InputError("vocabulary/context sizes are too small");
  if (!(init_std > 0.0)) throw InputError("init_std must be positive");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"layers", layers},   {"heads", heads},          {"embed", embed},       {"dropout", dropout},
          {"vocab", vocab},     {"context", context},      {"index_count", index_count},
          {"init_std", init_std}, {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.layers = j.value("layers", c.layers);
    c.heads = j.value("heads", c.heads);
    c.embed = j.value("embed", c.embed);
    c.dropout = j.value("dropout", c.dropout);
    c.vocab = j.value("vocab", c.vocab);
    c.context = j.value("context", c.context);
    c.index_count = j.value("index_count", c.index_count);
    c.init_std = j.value("init_std", c.init_std);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("", std::string("model config: ") + e.what());
  }
  c.check();
  return c;
}

template <typename T>
std::size_t Transformer<T>::add_slot(const std::string& name, std::size_t rows, std::size_t cols) {
  const std::size_t offset = slots_.empty() ? 0 : slots_.back().offset + slots_.back().rows * slots_.back().cols;
  slots_.push_back({name, offset, rows, cols});
  return slots_.size() - 1;
}

template <typename T>
Transformer<T>::Transformer(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.check();
  const std::size_t C = static_cast<std::size_t>(cfg_.embed);
  const std::size_t V = static_cast<std::size_t>(cfg_.vocab);
  wte_ = add_slot("wte", V, C);
  wpe_ = add_slot("wpe", static_cast<std::size_t>(cfg_.context), C);
  wie_ = add_slot("wie", static_cast<std::size_t>(cfg_.index_count), C);
  for (int l = 0; l < cfg_.layers; ++l) {
    const std::string pre = "h" + std::to_string(l) + ".";
    LayerSlots s{};
    s.ln1_g = add_slot(pre + "ln1.g", 1, C);
    s.ln1_b = add_slot(pre + "ln1.b", 1, C);
    s.qkv_w = add_slot(pre + "attn.qkv.w", C, 3 * C);
    s.qkv_b = add_slot(pre + "attn.qkv.b", 1, 3 * C);
    s.proj_w = add_slot(pre + "attn.proj.w", C, C);
    s.proj_b = add_slot(pre + "attn.proj.b", 1, C);
    s.ln2_g = add_slot(pre + "ln2.g", 1, C);
    s.ln2_b = add_slot(pre + "ln2.b", 1, C);
    s.fc_w = add_slot(pre + "mlp.fc.w", C, 4 * C);
    s.fc_b = add_slot(pre + "mlp.fc.b", 1, 4 * C);
    s.out_w = add_slot(pre + "mlp.out.w", 4 * C, C);
    s.out_b = add_slot(pre + "mlp.out.b", 1, C);
    layer_slots_.push_back(s);
  }
  lnf_g_ = add_slot("lnf.g", 1, C);
  lnf_b_ = add_slot("lnf.b", 1, C);
  head_w_ = add_slot("head.w", C, V);
  head_b_ = add_slot("head.b", 1, V);
  const Slot& last = slots_.back();
  params_.assign(last.offset + last.rows * last.cols, T(0));
  grads_.assign(params_.size(), T(0));
  initialize();
}

template <typename T>
void Transformer<T>::initialize() {
  std::mt19937_64 rng(cfg_.seed);
  std::normal_distribution<double> normal(0.0, cfg_.init_std);
  // Residual projections are scaled down by depth, as in GPT-2.
  const double resid_scale = 1.0 / std::sqrt(2.0 * cfg_.layers);
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    const Slot& s = slots_[i];
    const bool is_gain = s.name.ends_with(".g");
    const bool is_bias = s.name.ends_with(".b");
    const bool is_resid = s.name.ends_with("proj.w") || s.name.ends_with("out.w");
    T* data = params_.data() + s.offset;
    for (std::size_t k = 0; k < s.rows * s.cols; ++k) {
      if (is_gain) data[k] = T(1);
      else if (is_bias) data[k] = T(0);
      else data[k] = T(normal(rng) * (is_resid ? resid_scale : 1.0));
    }
  }
}

template <typename T>
typename Transformer<T>::ConstMatrixMap Transformer<T>::p(std::size_t i) const {
  const Slot& s = slots_[i];
  return ConstMatrixMap(params_.data() + s.offset, static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols));
}

template <typename T>
typename Transformer<T>::MatrixMap Transformer<T>::g(std::size_t i) {
  const Slot& s = slots_[i];
  return MatrixMap(grads_.data() + s.offset, static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols));
}

template <typename T>
typename Transformer<T>::MatrixMap Transformer<T>::tensor(const std::string& name) {
  for (const Slot& s : slots_)
    if (s.name == name)
      return MatrixMap(params_.data() + s.offset, static_cast<Eigen::Index>(s.rows), static_cast<Eigen::Index>(s.cols));
  throw InputError("unknown tensor: " + name);
}

template <typename T>
typename Transformer<T>::ConstMatrixMap Transformer<T>::tensor(const std::string& name) const {
  for (std::size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i].name == name) return p(i);
  throw InputError("unknown tensor: " + name);
}

template <typename T>
std::vector<std::string> Transformer<T>::tensor_names() const {
  std::vector<std::string> out;
  for (const Slot& s : slots_) out.push_back(s.name);
  return out;
}

template <typename T>
void Transformer<T>::zero_grad() {
  std::fill(grads_.begin(), grads_.end(), T(0));
}

template <typename T>
typename Transformer<T>::Matrix Transformer<T>::embed(std::span<const int> tokens, std::span<const int> positions,
                                                      std::span<const int> indices) const {
  if (tokens.size() != positions.size() || tokens.size() != indices.size())
    throw InputError("tokens, positions and indices must have equal length");
  if (tokens.empty()) throw InputError("empty input sequence");
  if (static_cast<int>(tokens.size()) > cfg_.context) throw InputError("sequence longer than the model context");
  check_ids(tokens, 0, cfg_.vocab - 1, "token");
  check_ids(positions, 1, cfg_.context, "position");
  check_ids(indices, 1, cfg_.index_count, "index");
  const auto wte = p(wte_), wpe = p(wpe_), wie = p(wie_);
  Matrix x(static_cast<Eigen::Index>(tokens.size()), cfg_.embed);
  for (std::size_t t = 0; t < tokens.size(); ++t)
    x.row(static_cast<Eigen::Index>(t)) = wte.row(tokens[t]) + wpe.row(positions[t] - 1) + wie.row(indices[t] - 1);
  return x;
}

template <typename T>
void Transformer<T>::forward(std::span<const int> tokens, std::span<const int> positions,
                             std::span<const int> indices, Activations& acts, std::mt19937_64* rng) const {
  const Eigen::Index n = static_cast<Eigen::Index>(tokens.size());
  const int C = cfg_.embed, H = cfg_.heads, D = C / H;
  const T scale = T(1.0 / std::sqrt(static_cast<double>(D)));
  const bool drop = rng != nullptr && cfg_.dropout > 0.0;

  acts.tokens.assign(tokens.begin(), tokens.end());
  acts.positions.assign(positions.begin(), positions.end());
  acts.indices.assign(indices.begin(), indices.end());
  acts.dropout_applied = drop;
  acts.layers.resize(static_cast<std::size_t>(cfg_.layers));

  Matrix x = embed(tokens, positions, indices);
  if (drop) {
    fill_dropout(acts.drop_embed, n, C, cfg_.dropout, *rng);
    x = x.cwiseProduct(acts.drop_embed);
  }

  for (int l = 0; l < cfg_.layers; ++l) {
    const LayerSlots& s = layer_slots_[static_cast<std::size_t>(l)];
    auto& a = acts.layers[static_cast<std::size_t>(l)];
    a.x_in = x;
    layer_norm(a.x_in, p(s.ln1_g), p(s.ln1_b), a.ln1_hat, a.ln1_rstd, a.ln1_out);
    a.qkv.noalias() = a.ln1_out * p(s.qkv_w);
    a.qkv.rowwise() += p(s.qkv_b).row(0);
    a.y.resize(n, C);
    a.attn.resize(static_cast<std::size_t>(H));
    for (int h = 0; h < H; ++h) {
      const auto q = a.qkv.middleCols(h * D, D);
      const auto k = a.qkv.middleCols(C + h * D, D);
      const auto v = a.qkv.middleCols(2 * C + h * D, D);
      Matrix& att = a.attn[static_cast<std::size_t>(h)];
      att.noalias() = (q * k.transpose()) * scale;
      for (Eigen::Index r = 0; r < n; ++r) {
        const T mx = att.row(r).head(r + 1).maxCoeff();
        att.row(r).head(r + 1) = (att.row(r).head(r + 1).array() - mx).exp();
        att.row(r).head(r + 1) /= att.row(r).head(r + 1).sum();
        att.row(r).tail(n - r - 1).setZero();
      }
      a.y.middleCols(h * D, D).noalias() = att * v;
    }
    Matrix proj = a.y * p(s.proj_w);
    proj.rowwise() += p(s.proj_b).row(0);
    if (drop) {
      fill_dropout(a.drop_attn, n, C, cfg_.dropout, *rng);
      proj = proj.cwiseProduct(a.drop_attn);
    }
    a.x_mid = a.x_in + proj;
    layer_norm(a.x_mid, p(s.ln2_g), p(s.ln2_b), a.ln2_hat, a.ln2_rstd, a.ln2_out);
    a.fc_pre.noalias() = a.ln2_out * p(s.fc_w);
    a.fc_pre.rowwise() += p(s.fc_b).row(0);
    a.fc_act = a.fc_pre.unaryExpr([](T v) { return gelu(v); });
    Matrix mlp = a.fc_act * p(s.out_w);
    mlp.rowwise() += p(s.out_b).row(0);
    if (drop) {
      fill_dropout(a.drop_mlp, n, C, cfg_.dropout, *rng);
      mlp = mlp.cwiseProduct(a.drop_mlp);
    }
    x = a.x_mid + mlp;
  }
  acts.lnf_in = std::move(x);
  layer_norm(acts.lnf_in, p(lnf_g_), p(lnf_b_), acts.lnf_hat, acts.lnf_rstd, acts.lnf_out);
  acts.logits.noalias() = acts.lnf_out * p(head_w_);
  acts.logits.rowwise() += p(head_b_).row(0);
}

template <typename T>
typename Transformer<T>::Matrix Transformer<T>::probabilities(std::span<const int> tokens,
                                                              std::span<const int> positions,
                                                              std::span<const int> indices) const {
  Activations acts;
  forward(tokens, positions, indices, acts, nullptr);
  Matrix probs = acts.logits;
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    probs.row(r) = (probs.row(r).array() - probs.row(r).maxCoeff()).exp();
    probs.row(r) /= probs.row(r).sum();
  }
  return probs;
}

template <typename T>
void Transformer<T>::backward(const Activations& acts, const Matrix& dlogits) {
  const Eigen::Index n = acts.logits.rows();
  if (dlogits.rows() != n || dlogits.cols() != acts.logits.cols())
    throw InputError("dlogits shape does not match the recorded forward pass");
  const int C = cfg_.embed, H = cfg_.heads, D = C / H;
  const T scale = T(1.0 / std::sqrt(static_cast<double>(D)));

  g(head_w_).noalias() += acts.lnf_out.transpose() * dlogits;
  g(head_b_) += dlogits.colwise().sum();
  Matrix dxf = dlogits * p(head_w_).transpose();
  Matrix dx = layer_norm_backward(dxf, acts.lnf_hat, acts.lnf_rstd, p(lnf_g_).row(0), g(lnf_g_), g(lnf_b_));

  for (int l = cfg_.layers - 1; l >= 0; --l) {
    const LayerSlots& s = layer_slots_[static_cast<std::size_t>(l)];
    const auto& a = acts.layers[static_cast<std::size_t>(l)];

    // MLP branch.
    Matrix dm = acts.dropout_applied ? Matrix(dx.cwiseProduct(a.drop_mlp)) : dx;
    g(s.out_w).noalias() += a.fc_act.transpose() * dm;
    g(s.out_b) += dm.colwise().sum();
    Matrix dh = dm * p(s.out_w).transpose();
    dh = dh.cwiseProduct(a.fc_pre.unaryExpr([](T v) { return gelu_grad(v); }));
    g(s.fc_w).noalias() += a.ln2_out.transpose() * dh;
    g(s.fc_b) += dh.colwise().sum();
    Matrix dln2 = dh * p(s.fc_w).transpose();
    Matrix dx_mid = dx + layer_norm_backward(dln2, a.ln2_hat, a.ln2_rstd, p(s.ln2_g).row(0), g(s.ln2_g), g(s.ln2_b));

    // Attention branch.
    Matrix da = acts.dropout_applied ? Matrix(dx_mid.cwiseProduct(a.drop_attn)) : dx_mid;
    g(s.proj_w).noalias() += a.y.transpose() * da;
    g(s.proj_b) += da.colwise().sum();
    Matrix dy = da * p(s.proj_w).transpose();
    Matrix dqkv(n, 3 * C);
    for (int h = 0; h < H; ++h) {
      const Matrix& att = a.attn[static_cast<std::size_t>(h)];
      const auto q = a.qkv.middleCols(h * D, D);
      const auto k = a.qkv.middleCols(C + h * D, D);
      const auto v = a.qkv.middleCols(2 * C + h * D, D);
      const auto dyh = dy.middleCols(h * D, D);
      Matrix datt = dyh * v.transpose();
      dqkv.middleCols(2 * C + h * D, D).noalias() = att.transpose() * dyh;
      // Softmax Jacobian, row by row; masked entries have att == 0.
      const auto rowdot = datt.cwiseProduct(att).rowwise().sum().eval();
      Matrix ds = (att.array() * (datt.colwise() - rowdot).array()).matrix() * scale;
      dqkv.middleCols(h * D, D).noalias() = ds * k;
      dqkv.middleCols(C + h * D, D).noalias() = ds.transpose() * q;
    }
    g(s.qkv_w).noalias() += a.ln1_out.transpose() * dqkv;
    g(s.qkv_b) += dqkv.colwise().sum();
    Matrix dln1 = dqkv * p(s.qkv_w).transpose();
    dx = dx_mid + layer_norm_backward(dln1, a.ln1_hat, a.ln1_rstd, p(s.ln1_g).row(0), g(s.ln1_g), g(s.ln1_b));
  }

  if (acts.dropout_applied) dx = dx.cwiseProduct(acts.drop_embed);
  auto gwte = g(wte_);
  auto gwpe = g(wpe_);
  auto gwie = g(wie_);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto i = static_cast<std::size_t>(t);
    gwte.row(acts.tokens[i]) += dx.row(t);
    gwpe.row(acts.positions[i] - 1) += dx.row(t);
    gwie.row(acts.indices[i] - 1) += dx.row(t);
  }
}

template <typename T>
typename Transformer<T>::KvCache Transformer<T>::make_cache() const {
  KvCache c;
  c.keys.assign(static_cast<std::size_t>(cfg_.layers), Matrix::Zero(cfg_.context, cfg_.embed));
  c.values.assign(static_cast<std::size_t>(cfg_.layers), Matrix::Zero(cfg_.context, cfg_.embed));
  return c;
}

template <typename T>
typename Transformer<T>::Matrix Transformer<T>::step(std::span<const int> tokens, std::span<const int> indices,
                                                     std::span<KvCache* const> caches) const {
  const std::size_t B = tokens.size();
  if (indices.size() != B || caches.size() != B) throw InputError("step: batch arrays differ in length");
  const int C = cfg_.embed, H = cfg_.heads, D = C / H;
  const T scale = T(1.0 / std::sqrt(static_cast<double>(D)));
  check_ids(tokens, 0, cfg_.vocab - 1, "token");
  check_ids(indices, 1, cfg_.index_count, "index");

  const auto wte = p(wte_), wpe = p(wpe_), wie = p(wie_);
  Matrix x(static_cast<Eigen::Index>(B), C);
  for (std::size_t b = 0; b < B; ++b) {
    const int pos = caches[b]->length;
    if (pos >= cfg_.context) throw InputError("step: cache is full");
    x.row(static_cast<Eigen::Index>(b)) = wte.row(tokens[b]) + wpe.row(pos) + wie.row(indices[b] - 1);
  }

  Matrix hat, xn, y(static_cast<Eigen::Index>(B), C);
  Eigen::Matrix<T, Eigen::Dynamic, 1> rstd;
  for (int l = 0; l < cfg_.layers; ++l) {
    const LayerSlots& s = layer_slots_[static_cast<std::size_t>(l)];
    layer_norm(x, p(s.ln1_g), p(s.ln1_b), hat, rstd, xn);
    Matrix qkv = xn * p(s.qkv_w);
    qkv.rowwise() += p(s.qkv_b).row(0);
    for (std::size_t b = 0; b < B; ++b) {
      const auto r = static_cast<Eigen::Index>(b);
      KvCache& c = *caches[b];
      const int len = c.length;
      Matrix& K = c.keys[static_cast<std::size_t>(l)];
      Matrix& Vv = c.values[static_cast<std::size_t>(l)];
      K.row(len) = qkv.row(r).segment(C, C);
      Vv.row(len) = qkv.row(r).segment(2 * C, C);
      for (int h = 0; h < H; ++h) {
        const auto q = qkv.row(r).segment(h * D, D);
        const auto keys = K.block(0, h * D, len + 1, D);
        RowVector sc = (keys * q.transpose()).transpose() * scale;
        sc = (sc.array() - sc.maxCoeff()).exp();
        sc /= sc.sum();
        y.row(r).segment(h * D, D).noalias() = sc * Vv.block(0, h * D, len + 1, D);
      }
    }
    Matrix proj = y * p(s.proj_w);
    proj.rowwise() += p(s.proj_b).row(0);
    x += proj;
    layer_norm(x, p(s.ln2_g), p(s.ln2_b), hat, rstd, xn);
    Matrix hdn = xn * p(s.fc_w);
    hdn.rowwise() += p(s.fc_b).row(0);
    hdn = hdn.unaryExpr([](T v) { return gelu(v); });
    Matrix mlp = hdn * p(s.out_w);
    mlp.rowwise() += p(s.out_b).row(0);
    x += mlp;
  }
  for (std::size_t b = 0; b < B; ++b) ++caches[b]->length;
  layer_norm(x, p(lnf_g_), p(lnf_b_), hat, rstd, xn);
  Matrix logits = xn * p(head_w_);
  logits.rowwise() += p(head_b_).row(0);
  return logits;
}

template <typename T>
void Transformer<T>::write(std::ostream& out) const {
  const std::string cfg = nlohmann::json{{"model", cfg_.to_json()}, {"meta", meta_}}.dump();
  const std::uint32_t cfg_len = static_cast<std::uint32_t>(cfg.size());
  const std::uint32_t scalar = sizeof(T);
  const std::uint64_t count = params_.size();
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kFormatVersion), sizeof kFormatVersion);
  out.write(reinterpret_cast<const char*>(&cfg_len), sizeof cfg_len);
  out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
  out.write(reinterpret_cast<const char*>(&scalar), sizeof scalar);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(params_.data()), static_cast<std::streamsize>(count * sizeof(T)));
  if (!out) throw InputError("failed to write checkpoint");
}

template <typename T>
Transformer<T> Transformer<T>::read(std::istream& in) {
  char magic[4];
  std::uint32_t version = 0, cfg_len = 0, scalar = 0;
  std::uint64_t count = 0;
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw ParseError("", "not a layoutlab checkpoint");
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in || version != kFormatVersion) throw ParseError("", "unsupported checkpoint version");
  in.read(reinterpret_cast<char*>(&cfg_len), sizeof cfg_len);
  if (!in || cfg_len > (1u << 20)) throw ParseError("", "corrupt checkpoint header");
  std::string cfg(cfg_len, '\0');
  in.read(cfg.data(), cfg_len);
  in.read(reinterpret_cast<char*>(&scalar), sizeof scalar);
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in) throw ParseError("", "truncated checkpoint header");
  if (scalar != sizeof(T)) throw ParseError("", "checkpoint scalar width does not match");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(cfg);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("/config", e.what());
  }
  if (!j.is_object() || !j.contains("model")) throw ParseError("/model", "missing model config");
  Transformer model(ModelConfig::from_json(j["model"]));
  model.meta_ = j.value("meta", nlohmann::json::object());
  if (count != model.params_.size()) throw ParseError("", "checkpoint parameter count does not match its config");
  in.read(reinterpret_cast<char*>(model.params_.data()), static_cast<std::streamsize>(count * sizeof(T)));
  if (!in) throw ParseError("", "truncated checkpoint parameters");
  return model;
}

template <typename T>
void Transformer<T>::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open checkpoint for writing: " + path);
  write(out);
}

template <typename T>
Transformer<T> Transformer<T>::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open checkpoint");
  try {
    return read(in);
  } catch (const ParseError& e) {
    throw ParseError(path, e.what());
  }
}

template class Transformer<float>;
template class Transformer<double>;

}  // namespace layoutlab
