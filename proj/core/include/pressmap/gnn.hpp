#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pressmap/ppm_graph.hpp"

namespace pressmap {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kConvLayers = 3;
inline constexpr int kClasses = 2;
/// Class indices of the head: 0 = possession lost, 1 = kept.
inline constexpr int kLabelLose = 0;
inline constexpr int kLabelKeep = 1;

/// Directed edge list shared by every graph of one example.
struct GraphTopology {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // (source, target)

  static GraphTopology complete(int num_nodes);
  friend bool operator==(const GraphTopology&, const GraphTopology&) = default;
};

/// One attributed graph in model-ready form.
struct GraphInput {
  RowMatrix node_features;  // num_nodes x node_dim
  RowMatrix edge_features;  // num_edges x edge_dim, aligned with topology.edges
};

/// A sequence of graphs on one topology, stacked for batched evaluation.
struct SequenceInput {
  std::shared_ptr<const GraphTopology> topology;
  int num_graphs = 0;
  RowMatrix nodes;      // (num_graphs * num_nodes) x node_dim
  RowMatrix edge_mean;  // (num_graphs * num_nodes) x edge_dim, mean over in-edges
};

SequenceInput pack(std::shared_ptr<const GraphTopology> topology, std::span<const GraphInput> graphs);
SequenceInput pack(const PpmSequence& sequence);
GraphInput to_graph_input(const PpmGraph& graph);
/// The K12 topology in PPM edge order.
std::shared_ptr<const GraphTopology> ppm_topology();

struct ModelDims {
  int node_dim = kNodeFeatures;
  int edge_dim = kEdgeFeatures;
  int hidden = 32;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Location of one parameter matrix inside the flat parameter vector.
struct ParamBlock {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

/// Possession-outcome model: three message-passing layers, global mean
/// pooling over nodes and frames, dropout, and a two-class linear head.
///
/// Parameters live in one flat vector in declared order (per layer:
/// w_self, w_msg, bias; then head_w, head_b), each block row-major.
class PopModel {
 public:
  PopModel() : PopModel(ModelDims{}) {}
  explicit PopModel(ModelDims dims, double dropout = 0.5, PpmVariant variant = PpmVariant::ppm3d);

  /// Uniform ±sqrt(6 / (fan_in + fan_out)) weights, zero biases.
  static PopModel initialized(ModelDims dims, std::uint64_t seed, double dropout = 0.5,
                              PpmVariant variant = PpmVariant::ppm3d);

  const ModelDims& dims() const { return dims_; }
  double dropout() const { return dropout_; }
  PpmVariant variant() const { return variant_; }
  void set_variant(PpmVariant v) { variant_ = v; }

  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  std::span<const double> parameters() const { return params_; }
  /// Mutable access bumps the revision so stale forward caches are detected.
  std::span<double> mutable_parameters() {
    ++revision_;
    return params_;
  }
  std::uint64_t revision() const { return revision_; }

  using ConstMap = Eigen::Map<const RowMatrix>;
  ConstMap block(std::size_t index) const;
  std::size_t layer_block(int layer, int part) const { return static_cast<std::size_t>(layer) * 3 + part; }
  std::size_t head_w_block() const { return kConvLayers * 3; }
  std::size_t head_b_block() const { return kConvLayers * 3 + 1; }

 private:
  ModelDims dims_;
  double dropout_ = 0.5;
  PpmVariant variant_ = PpmVariant::ppm3d;
  std::vector<ParamBlock> blocks_;
  std::vector<double> params_;
  std::uint64_t revision_ = 0;
};

enum class Mode { train, eval };

struct Prediction {
  double p_keep = 0.5;
  double p_lose = 0.5;
  /// Team pressure is the probability of losing the ball.
  double team_pressure = 0.5;
};

/// Activations kept by a train-mode forward pass for backward().
struct ForwardCache {
  std::array<RowMatrix, kConvLayers + 1> h;   // layer inputs; h[3] is the final embedding
  std::array<RowMatrix, kConvLayers> msg;     // [mean in-neighbour h ; mean in-edge features]
  std::array<RowMatrix, kConvLayers> pre;     // pre-activations
  Eigen::VectorXd pooled;
  Eigen::VectorXd dropout_scale;              // 0 or 1/(1-p) per unit; ones in eval mode
  Eigen::VectorXd dropped;
  Eigen::Vector2d probs;
  const SequenceInput* input = nullptr;
  std::uint64_t revision = 0;
  bool valid = false;
};

/// Runs the model on one example. Dropout is applied only in train mode,
/// with the mask drawn from `seed`. Throws ModelError on shape mismatch or
/// a non-finite activation.
Prediction forward(const PopModel& model, const SequenceInput& input, Mode mode, std::uint64_t seed = 0,
                   ForwardCache* cache = nullptr);

/// Cross-entropy of the true class.
double loss(const Prediction& pred, int label);

/// Accumulates d(loss)/d(parameters) into `grad` (sized like the parameters).
/// Throws ModelError if the cache is missing or predates a parameter update.
void backward(const PopModel& model, const ForwardCache& cache, int label, std::span<double> grad);

}  // namespace pressmap
