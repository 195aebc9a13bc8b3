#include <benchmark/benchmark.h>

#include <string>

#include "pressmap/gnn.hpp"
#include "pressmap/pitch_control.hpp"
#include "pressmap/pressure.hpp"
#include "pressmap/rng.hpp"

namespace pressmap {
namespace {

Frame bench_frame(std::uint64_t seed) {
  Rng rng(seed);
  const PitchSpec pitch;
  Frame f;
  for (const char* team : {"home", "away"}) {
    for (int i = 1; i <= 11; ++i) {
      PlayerState p;
      p.player_id = std::string(team[0] == 'h' ? "h" : "a") + std::to_string(i);
      p.team = team;
      p.position = {rng.uniform(0.0, pitch.length), rng.uniform(0.0, pitch.width)};
      p.velocity = Vec2{rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0)};
      f.players.push_back(p);
    }
  }
  f.ball = BallState{f.players[0].position, std::nullopt};
  f.ball_owner = "h1";
  return f;
}

void BM_ControlGrid(benchmark::State& state) {
  const Frame f = bench_frame(1);
  const PitchSpec pitch;
  for (auto _ : state) {
    benchmark::DoNotOptimize(control_grid(f, "home", pitch, static_cast<double>(state.range(0)), ControlParams{}));
  }
}
BENCHMARK(BM_ControlGrid)->Arg(1)->Arg(2);

void BM_PressureCircle(benchmark::State& state) {
  const Frame f = bench_frame(2);
  for (auto _ : state) {
    for (int i = 1; i <= 11; ++i) {
      benchmark::DoNotOptimize(sample_pressure_circle(f, "home", "h" + std::to_string(i), ControlParams{}));
    }
  }
  state.SetItemsProcessed(state.iterations() * 11);
}
BENCHMARK(BM_PressureCircle);

SequenceInput random_sequence(int graphs) {
  Rng rng(3);
  std::vector<GraphInput> in(graphs);
  for (auto& g : in) {
    g.node_features.resize(kPpmNodes, kNodeFeatures);
    g.edge_features.resize(kDirectedEdges, kEdgeFeatures);
    for (double& v : g.node_features.reshaped()) v = rng.uniform(-1.0, 1.0);
    for (double& v : g.edge_features.reshaped()) v = rng.uniform(-1.0, 1.0);
  }
  return pack(ppm_topology(), in);
}

void BM_Forward(benchmark::State& state) {
  const auto model = PopModel::initialized(ModelDims{kNodeFeatures, kEdgeFeatures, static_cast<int>(state.range(0))}, 1);
  const auto input = random_sequence(kFramesPerWindow);
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, input, Mode::eval));
}
BENCHMARK(BM_Forward)->Arg(16)->Arg(32);

void BM_ForwardBackward(benchmark::State& state) {
  const auto model = PopModel::initialized(ModelDims{kNodeFeatures, kEdgeFeatures, static_cast<int>(state.range(0))}, 1);
  const auto input = random_sequence(kFramesPerWindow);
  std::vector<double> grad(model.parameters().size());
  ForwardCache cache;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    forward(model, input, Mode::train, ++seed, &cache);
    backward(model, cache, kLabelKeep, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(16)->Arg(32);

}  // namespace
}  // namespace pressmap

BENCHMARK_MAIN();
