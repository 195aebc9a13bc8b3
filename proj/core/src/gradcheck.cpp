#include "pressmap/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "pressmap/rng.hpp"

namespace pressmap {

GradCheckReport gradient_check(const PopModel& model, const SequenceInput& input, int label, std::uint64_t seed,
                               double step) {
  PopModel probe = model;
  ForwardCache cache;
  forward(probe, input, Mode::train, seed, &cache);
  std::vector<double> analytic(probe.parameters().size(), 0.0);
  backward(probe, cache, label, analytic);

  auto loss_at = [&](std::size_t i, double value) {
    probe.mutable_parameters()[i] = value;
    return loss(forward(probe, input, Mode::train, seed), label);
  };

  GradCheckReport report;
  for (const auto& block : probe.blocks()) {
    BlockCheck check{block.name, block.size(), 0.0};
    for (std::size_t i = block.offset; i < block.offset + block.size(); ++i) {
      const double x = probe.parameters()[i];
      const double numeric = (loss_at(i, x + step) - loss_at(i, x - step)) / (2.0 * step);
      probe.mutable_parameters()[i] = x;
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), kGradCheckFloor});
      check.max_relative_error = std::max(check.max_relative_error, std::abs(a - numeric) / denom);
    }
    report.max_relative_error = std::max(report.max_relative_error, check.max_relative_error);
    report.blocks.push_back(check);
  }
  return report;
}

SequenceInput toy_sequence(const ModelDims& dims, int num_graphs, bool complete, std::uint64_t seed) {
  Rng rng(seed);
  auto topo = std::make_shared<GraphTopology>(GraphTopology::complete(3));
  if (!complete) topo->edges = {{0, 1}, {1, 2}, {2, 0}, {0, 2}};
  std::vector<GraphInput> graphs;
  for (int g = 0; g < num_graphs; ++g) {
    GraphInput in;
    in.node_features.resize(3, dims.node_dim);
    in.edge_features.resize(static_cast<Eigen::Index>(topo->edges.size()), dims.edge_dim);
    for (double& v : in.node_features.reshaped()) v = rng.uniform(-1.0, 1.0);
    for (double& v : in.edge_features.reshaped()) v = rng.uniform(-1.0, 1.0);
    graphs.push_back(std::move(in));
  }
  return pack(topo, graphs);
}

}  // namespace pressmap
