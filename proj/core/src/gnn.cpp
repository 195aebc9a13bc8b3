#include "pressmap/gnn.hpp"

#include <algorithm>
#include <cmath>

#include "pressmap/error.hpp"
#include "pressmap/rng.hpp"

namespace pressmap {

GraphTopology GraphTopology::complete(int num_nodes) {
  GraphTopology t;
  t.num_nodes = num_nodes;
  for (int u = 0; u < num_nodes; ++u) {
    for (int v = 0; v < num_nodes; ++v) {
      if (u != v) t.edges.emplace_back(u, v);
    }
  }
  return t;
}

std::shared_ptr<const GraphTopology> ppm_topology() {
  // complete() enumerates (u, v) lexicographically, matching PpmGraph::edge_slot.
  static const auto topology = std::make_shared<const GraphTopology>(GraphTopology::complete(kPpmNodes));
  return topology;
}

namespace {

std::vector<double> inverse_in_degree(const GraphTopology& topo) {
  std::vector<double> deg(static_cast<std::size_t>(topo.num_nodes), 0.0);
  for (const auto& [s, t] : topo.edges) deg[static_cast<std::size_t>(t)] += 1.0;
  for (auto& d : deg) d = d > 0.0 ? 1.0 / d : 0.0;
  return deg;
}

}  // namespace

SequenceInput pack(std::shared_ptr<const GraphTopology> topology, std::span<const GraphInput> graphs) {
  if (!topology) throw ModelError("pack: missing topology");
  if (graphs.empty()) throw ModelError("pack: empty graph sequence");
  const int n = topology->num_nodes;
  const auto num_edges = static_cast<Eigen::Index>(topology->edges.size());
  const Eigen::Index node_dim = graphs.front().node_features.cols();
  const Eigen::Index edge_dim = graphs.front().edge_features.cols();
  const auto inv_deg = inverse_in_degree(*topology);

  SequenceInput in;
  in.topology = topology;
  in.num_graphs = static_cast<int>(graphs.size());
  in.nodes.resize(static_cast<Eigen::Index>(graphs.size()) * n, node_dim);
  in.edge_mean = RowMatrix::Zero(in.nodes.rows(), edge_dim);
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const auto& graph = graphs[g];
    if (graph.node_features.rows() != n || graph.node_features.cols() != node_dim ||
        graph.edge_features.rows() != num_edges || graph.edge_features.cols() != edge_dim) {
      throw ModelError("pack: graph " + std::to_string(g) + " does not match the shared topology");
    }
    const Eigen::Index base = static_cast<Eigen::Index>(g) * n;
    in.nodes.middleRows(base, n) = graph.node_features;
    for (Eigen::Index e = 0; e < num_edges; ++e) {
      const int t = topology->edges[static_cast<std::size_t>(e)].second;
      in.edge_mean.row(base + t) += graph.edge_features.row(e);
    }
    for (int v = 0; v < n; ++v) in.edge_mean.row(base + v) *= inv_deg[static_cast<std::size_t>(v)];
  }
  return in;
}

GraphInput to_graph_input(const PpmGraph& graph) {
  GraphInput g;
  g.node_features.resize(kPpmNodes, kNodeFeatures);
  for (int i = 0; i < kPpmNodes; ++i) {
    for (int j = 0; j < kNodeFeatures; ++j) g.node_features(i, j) = graph.nodes[i][j];
  }
  g.edge_features.resize(kDirectedEdges, kEdgeFeatures);
  for (int e = 0; e < kDirectedEdges; ++e) {
    for (int j = 0; j < kEdgeFeatures; ++j) g.edge_features(e, j) = graph.edges[e][j];
  }
  return g;
}

SequenceInput pack(const PpmSequence& sequence) {
  std::vector<GraphInput> graphs;
  graphs.reserve(sequence.graphs.size());
  for (const auto& g : sequence.graphs) graphs.push_back(to_graph_input(g));
  return pack(ppm_topology(), graphs);
}

PopModel::PopModel(ModelDims dims, double dropout, PpmVariant variant)
    : dims_(dims), dropout_(dropout), variant_(variant) {
  if (dims.node_dim <= 0 || dims.edge_dim < 0 || dims.hidden <= 0) throw ModelError("invalid model dimensions");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ModelError("dropout rate must lie in [0, 1)");
  std::size_t offset = 0;
  auto add = [&](std::string name, int rows, int cols) {
    blocks_.push_back(ParamBlock{std::move(name), rows, cols, offset});
    offset += static_cast<std::size_t>(rows) * cols;
  };
  int in = dims.node_dim;
  for (int l = 0; l < kConvLayers; ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    add(prefix + "w_self", dims.hidden, in);
    add(prefix + "w_msg", dims.hidden, in + dims.edge_dim);
    add(prefix + "bias", dims.hidden, 1);
    in = dims.hidden;
  }
  add("head.w", kClasses, dims.hidden);
  add("head.b", kClasses, 1);
  params_.assign(offset, 0.0);
}

PopModel PopModel::initialized(ModelDims dims, std::uint64_t seed, double dropout, PpmVariant variant) {
  PopModel model(dims, dropout, variant);
  Rng rng(seed);
  auto params = model.mutable_parameters();
  for (const auto& b : model.blocks_) {
    if (b.cols == 1) continue;  // biases start at zero
    const double limit = std::sqrt(6.0 / (b.rows + b.cols));
    for (std::size_t i = 0; i < b.size(); ++i) params[b.offset + i] = rng.uniform(-limit, limit);
  }
  return model;
}

PopModel::ConstMap PopModel::block(std::size_t index) const {
  const auto& b = blocks_.at(index);
  return ConstMap(params_.data() + b.offset, b.rows, b.cols);
}

namespace {

// Each ordered pair once, no self-loops: the mean over in-neighbours is then
// (column sum - own row) / (n - 1), which avoids the per-edge loop.
bool is_complete(const GraphTopology& topo) {
  const int n = topo.num_nodes;
  if (n < 2 || topo.edges.size() != static_cast<std::size_t>(n) * (n - 1)) return false;
  std::vector<char> seen(static_cast<std::size_t>(n) * n, 0);
  for (const auto& [s, t] : topo.edges) {
    if (s == t || s < 0 || t < 0 || s >= n || t >= n) return false;
    char& slot = seen[static_cast<std::size_t>(s) * n + t];
    if (slot) return false;
    slot = 1;
  }
  return true;
}

void aggregate(const RowMatrix& h, const GraphTopology& topo, int num_graphs, const std::vector<double>& inv_deg,
               RowMatrix& msg) {
  const int n = topo.num_nodes;
  const Eigen::Index d = h.cols();
  if (is_complete(topo)) {
    const double scale = 1.0 / (n - 1);
    for (int g = 0; g < num_graphs; ++g) {
      const Eigen::Index base = static_cast<Eigen::Index>(g) * n;
      const Eigen::RowVectorXd sum = h.middleRows(base, n).colwise().sum();
      msg.block(base, 0, n, d) = ((-h.middleRows(base, n)).rowwise() + sum) * scale;
    }
    return;
  }
  msg.leftCols(d).setZero();
  for (int g = 0; g < num_graphs; ++g) {
    const Eigen::Index base = static_cast<Eigen::Index>(g) * n;
    for (const auto& [s, t] : topo.edges) msg.row(base + t).head(d) += h.row(base + s);
    for (int v = 0; v < n; ++v) msg.row(base + v).head(d) *= inv_deg[static_cast<std::size_t>(v)];
  }
}

void check_finite(const RowMatrix& m, const std::string& where) {
  if (!m.allFinite()) throw ModelError("non-finite activation in " + where);
}

}  // namespace

Prediction forward(const PopModel& model, const SequenceInput& input, Mode mode, std::uint64_t seed,
                   ForwardCache* cache) {
  const ModelDims& dims = model.dims();
  if (!input.topology || input.nodes.cols() != dims.node_dim || input.edge_mean.cols() != dims.edge_dim ||
      input.nodes.rows() != static_cast<Eigen::Index>(input.num_graphs) * input.topology->num_nodes ||
      input.nodes.rows() == 0) {
    throw ModelError("forward: input shape does not match model dimensions");
  }
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.valid = false;
  const auto& topo = *input.topology;
  const auto inv_deg = inverse_in_degree(topo);
  const Eigen::Index rows = input.nodes.rows();

  c.h[0] = input.nodes;
  for (int l = 0; l < kConvLayers; ++l) {
    const Eigen::Index d = c.h[l].cols();
    c.msg[l].resize(rows, d + dims.edge_dim);
    aggregate(c.h[l], topo, input.num_graphs, inv_deg, c.msg[l]);
    c.msg[l].rightCols(dims.edge_dim) = input.edge_mean;

    const auto w_self = model.block(model.layer_block(l, 0));
    const auto w_msg = model.block(model.layer_block(l, 1));
    const auto bias = model.block(model.layer_block(l, 2));
    c.pre[l].noalias() = c.h[l] * w_self.transpose();
    c.pre[l].noalias() += c.msg[l] * w_msg.transpose();
    c.pre[l].rowwise() += bias.col(0).transpose();
    check_finite(c.pre[l], "layer " + std::to_string(l));
    c.h[l + 1] = c.pre[l].cwiseMax(0.0);
  }

  // Every graph has the same node count, so the mean over nodes of each
  // graph followed by the mean over graphs is the mean over all rows.
  c.pooled = c.h[kConvLayers].colwise().mean().transpose();

  c.dropout_scale = Eigen::VectorXd::Ones(dims.hidden);
  if (mode == Mode::train && model.dropout() > 0.0) {
    Rng rng(seed);
    const double keep_scale = 1.0 / (1.0 - model.dropout());
    for (int i = 0; i < dims.hidden; ++i) c.dropout_scale[i] = rng.uniform() < model.dropout() ? 0.0 : keep_scale;
  }
  c.dropped = c.pooled.cwiseProduct(c.dropout_scale);

  const auto head_w = model.block(model.head_w_block());
  const auto head_b = model.block(model.head_b_block());
  const Eigen::Vector2d logits = head_w * c.dropped + head_b.col(0);
  if (!logits.allFinite()) throw ModelError("non-finite activation in head");
  const double m = logits.maxCoeff();
  const Eigen::Vector2d e = (logits.array() - m).exp().matrix();
  c.probs = e / e.sum();

  c.input = &input;
  c.revision = model.revision();
  c.valid = true;

  Prediction p;
  p.p_lose = c.probs[kLabelLose];
  p.p_keep = 1.0 - p.p_lose;
  p.team_pressure = p.p_lose;
  return p;
}

double loss(const Prediction& pred, int label) {
  const double p_true = label == kLabelKeep ? pred.p_keep : pred.p_lose;
  return -std::log(std::max(p_true, 1e-300));
}

void backward(const PopModel& model, const ForwardCache& c, int label, std::span<double> grad) {
  if (!c.valid || !c.input) throw ModelError("backward: no forward cache");
  if (c.revision != model.revision()) throw ModelError("backward: stale forward cache");
  if (grad.size() != model.parameters().size()) throw ModelError("backward: gradient buffer size mismatch");
  if (label != kLabelKeep && label != kLabelLose) throw ModelError("backward: label must be 0 or 1");

  const auto& blocks = model.blocks();
  auto grad_block = [&](std::size_t index) {
    const auto& b = blocks[index];
    return Eigen::Map<RowMatrix>(grad.data() + b.offset, b.rows, b.cols);
  };

  Eigen::Vector2d dlogits = c.probs;
  dlogits[label] -= 1.0;
  grad_block(model.head_w_block()).noalias() += dlogits * c.dropped.transpose();
  grad_block(model.head_b_block()).col(0) += dlogits;

  const Eigen::VectorXd d_pooled =
      (model.block(model.head_w_block()).transpose() * dlogits).cwiseProduct(c.dropout_scale);

  const auto& topo = *c.input->topology;
  const auto inv_deg = inverse_in_degree(topo);
  const Eigen::Index rows = c.h[0].rows();
  const int n = topo.num_nodes;
  const bool complete = is_complete(topo);

  RowMatrix dh = (d_pooled / static_cast<double>(rows)).transpose().replicate(rows, 1);
  for (int l = kConvLayers - 1; l >= 0; --l) {
    const RowMatrix dz = dh.cwiseProduct((c.pre[l].array() > 0.0).cast<double>().matrix());
    grad_block(model.layer_block(l, 0)).noalias() += dz.transpose() * c.h[l];
    grad_block(model.layer_block(l, 1)).noalias() += dz.transpose() * c.msg[l];
    grad_block(model.layer_block(l, 2)).col(0) += dz.colwise().sum().transpose();
    if (l == 0) break;

    const Eigen::Index d = c.h[l].cols();
    const auto w_self = model.block(model.layer_block(l, 0));
    const auto w_msg = model.block(model.layer_block(l, 1));
    RowMatrix dh_prev = dz * w_self;
    RowMatrix d_agg = dz * w_msg.leftCols(d);
    if (complete) {
      const double scale = 1.0 / (n - 1);
      for (int g = 0; g < c.input->num_graphs; ++g) {
        const Eigen::Index base = static_cast<Eigen::Index>(g) * n;
        const Eigen::RowVectorXd sum = d_agg.middleRows(base, n).colwise().sum();
        dh_prev.middleRows(base, n) += ((-d_agg.middleRows(base, n)).rowwise() + sum) * scale;
      }
      dh = std::move(dh_prev);
      continue;
    }
    for (int g = 0; g < c.input->num_graphs; ++g) {
      const Eigen::Index base = static_cast<Eigen::Index>(g) * n;
      for (int v = 0; v < n; ++v) d_agg.row(base + v) *= inv_deg[static_cast<std::size_t>(v)];
      for (const auto& [s, t] : topo.edges) dh_prev.row(base + s) += d_agg.row(base + t);
    }
    dh = std::move(dh_prev);
  }
}

}  // namespace pressmap
