#pragma once

// Decoder-only transformer over layout token sequences with a hand-written
// backward pass. Parameters live in one flat buffer (gradients in a parallel
// one) so the optimizer, checkpointing and gradient checks can treat them as
// a single vector.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace layoutlab {

struct ModelConfig {
  int layers = 4;
  int heads = 4;
  int embed = 128;
  double dropout = 0.1;
  int vocab = 258;    // resolution + pad + stop
  int context = 127;  // max tokens + stop
  int index_count = 6;
  double init_std = 0.02;
  std::uint64_t seed = 0;

  static ModelConfig desk();   // 4 layers, 4 heads, 128 dims
  static ModelConfig paper();  // 12 layers, 8 heads, 256 dims

  void check() const;  // throws InputError
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
class Transformer {
 public:
  using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using RowMap = Eigen::Map<RowVector>;
  using ConstRowMap = Eigen::Map<const RowVector>;

  // Per-sequence activations recorded by a training forward pass.
  struct Activations {
    struct Layer {
      Matrix x_in, ln1_hat, ln1_out, qkv, y, x_mid, ln2_hat, ln2_out, fc_pre, fc_act;
      Eigen::Matrix<T, Eigen::Dynamic, 1> ln1_rstd, ln2_rstd;
      std::vector<Matrix> attn;  // per head, T x T (causal softmax)
      Matrix drop_attn, drop_mlp;
    };
    std::vector<int> tokens, positions, indices;
    Matrix drop_embed;
    std::vector<Layer> layers;
    Matrix lnf_in, lnf_hat, lnf_out;
    Eigen::Matrix<T, Eigen::Dynamic, 1> lnf_rstd;
    Matrix logits;
    bool dropout_applied = false;
  };

  // Key/value history of one sequence for incremental decoding.
  struct KvCache {
    std::vector<Matrix> keys, values;  // per layer, context x embed
    int length = 0;
  };

  explicit Transformer(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  std::size_t num_parameters() const { return params_.size(); }
  std::span<T> parameters() { return params_; }
  std::span<const T> parameters() const { return params_; }
  std::span<T> gradients() { return grads_; }
  std::span<const T> gradients() const { return grads_; }
  void zero_grad();

  // Sum of the token, position and slot-index embeddings (T x C).
  Matrix embed(std::span<const int> tokens, std::span<const int> positions, std::span<const int> indices) const;

  // Logits for every step. With `rng` non-null and dropout > 0, dropout masks
  // are sampled and recorded.
  void forward(std::span<const int> tokens, std::span<const int> positions, std::span<const int> indices,
               Activations& acts, std::mt19937_64* rng = nullptr) const;

  // Row-wise softmax of the logits (each row sums to 1).
  Matrix probabilities(std::span<const int> tokens, std::span<const int> positions,
                       std::span<const int> indices) const;

  // Accumulates parameter gradients given dLoss/dLogits for a recorded pass.
  void backward(const Activations& acts, const Matrix& dlogits);

  KvCache make_cache() const;
  // One decoding step for each row: the token at caches[b]->length + 1.
  // Returns logits (B x V) and advances every cache by one.
  Matrix step(std::span<const int> tokens, std::span<const int> indices, std::span<KvCache* const> caches) const;

  // Free-form JSON stored in the checkpoint header (codec bounds, taxonomy).
  nlohmann::json& metadata() { return meta_; }
  const nlohmann::json& metadata() const { return meta_; }

  void save(const std::string& path) const;
  static Transformer load(const std::string& path);
  void write(std::ostream& out) const;
  static Transformer read(std::istream& in);

  // Named tensor views (row-major).
  MatrixMap tensor(const std::string& name);
  ConstMatrixMap tensor(const std::string& name) const;
  std::vector<std::string> tensor_names() const;

 private:
  struct Slot {
    std::string name;
    std::size_t offset, rows, cols;
  };
  struct LayerSlots {
    std::size_t ln1_g, ln1_b, qkv_w, qkv_b, proj_w, proj_b, ln2_g, ln2_b, fc_w, fc_b, out_w, out_b;
  };

  std::size_t add_slot(const std::string& name, std::size_t rows, std::size_t cols);
  void initialize();
  const Slot& slot(std::size_t i) const { return slots_[i]; }
  ConstMatrixMap p(std::size_t i) const;
  MatrixMap g(std::size_t i);

  ModelConfig cfg_;
  std::vector<Slot> slots_;
  std::size_t wte_ = 0, wpe_ = 0, wie_ = 0, lnf_g_ = 0, lnf_b_ = 0, head_w_ = 0, head_b_ = 0;
  std::vector<LayerSlots> layer_slots_;
  // Aligned so vectorized reductions sum in the same order wherever the
  // buffer lands; results are then reproducible within and across runs.
  std::vector<T, Eigen::aligned_allocator<T>> params_, grads_;
  nlohmann::json meta_ = nlohmann::json::object();
};

extern template class Transformer<float>;
extern template class Transformer<double>;

using Model = Transformer<float>;

}  // namespace layoutlab
