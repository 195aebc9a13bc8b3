// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "pressmap/analytics.hpp"
#include "pressmap/gnn.hpp"
#include "pressmap/gradcheck.hpp"
#include "pressmap/pipeline.hpp"
#include "pressmap/pitch_control.hpp"
#include "pressmap/pressure.hpp"
#include "pressmap/rng.hpp"
#include "pressmap/synth.hpp"
#include "pressmap/text.hpp"
#include "pressmap/trainer.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace pressmap;

namespace {

struct Outcome_ {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) { return text::format_double(x); }

Outcome_ complement() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  const ControlParams params;
  const PitchSpec pitch;
  double worst = 0.0;
  bool in_range = true;
  for (int i = 0; i < 1000; ++i) {
    const Frame f = testing::random_frame(rng, pitch);
    const Vec2 q{rng.uniform(0.0, pitch.length), rng.uniform(0.0, pitch.width)};
    const double a = defensive_control(f, "home", q, params);
    const double b = defensive_control(testing::swap_teams(f), "home", q, params);
    worst = std::max(worst, std::abs(a + b - 1.0));
    in_range = in_range && a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0;
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && in_range && t < 5.0,
          "max |a + a_swapped - 1| = " + fmt(worst) + ", in [0,1]: " + (in_range ? "yes" : "no") + ", " + fmt(t) +
              " s"};
}

Outcome_ oracle_equality() {
  Rng rng(77);
  const ControlParams params;
  std::size_t mismatches = 0, checked = 0;
  for (int i = 0; i < 100; ++i) {
    const Frame f = testing::random_frame(rng);
    const Sides sides = split_sides(f, "home");
    for (const auto& p : f.players) {
      if (p.team != "home") continue;
      const auto v = sample_pressure_circle(f, "home", p.player_id, params);
      for (int k = 0; k < kDirections; ++k) {
        const double a = 2.0 * std::numbers::pi * k / kDirections;
        const Vec2 q{p.position.x + kPressureRadius * std::cos(a), p.position.y + kPressureRadius * std::sin(a)};
        mismatches += v.values[k] != defensive_control(sides, q, params);
        ++checked;
      }
    }
  }
  return {mismatches == 0 && checked == 100 * 11 * 8,
          std::to_string(checked) + " components, " + std::to_string(mismatches) + " not bit-identical"};
}

Outcome_ gradient() {
  const auto t0 = Clock::now();
  const ModelDims dims{5, 3, 6};
  double worst = 0.0;
  std::size_t blocks = 0;
  for (bool complete : {true, false}) {
    for (int label : {kLabelLose, kLabelKeep}) {
      const auto model = PopModel::initialized(dims, 11 + label, 0.5);
      const auto input = toy_sequence(dims, 3, complete, 5 + label);
      const auto report = gradient_check(model, input, label, 13);
      worst = std::max(worst, report.max_relative_error);
      blocks = report.blocks.size();
    }
  }
  const double t = seconds_since(t0);
  return {worst < 1e-4 && t < 30.0,
          "max relative error " + fmt(worst) + " over " + std::to_string(blocks) + " parameter blocks, " + fmt(t) +
              " s"};
}

/// Node i of the result is node perm[i] of the input.
GraphInput permuted(const GraphInput& g, const std::vector<int>& perm) {
  GraphInput out = g;
  for (int i = 0; i < kPpmNodes; ++i) out.node_features.row(i) = g.node_features.row(perm[i]);
  for (int u = 0; u < kPpmNodes; ++u) {
    for (int v = 0; v < kPpmNodes; ++v) {
      if (u != v) {
        out.edge_features.row(PpmGraph::edge_slot(u, v)) = g.edge_features.row(PpmGraph::edge_slot(perm[u], perm[v]));
      }
    }
  }
  return out;
}

Outcome_ permutation() {
  Rng rng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = PopModel::initialized(ModelDims{}, 500 + trial);
    const auto variant = static_cast<PpmVariant>(trial % 3);
    std::vector<GraphInput> graphs;
    for (int g = 0; g < 4; ++g) {
      const Frame f = testing::random_frame(rng);
      graphs.push_back(to_graph_input(build_ppm(f, "home", testing::home_pressures(f), variant)));
    }
    std::vector<int> perm(kPpmNodes);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = kPpmNodes - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<GraphInput> shuffled;
    for (const auto& g : graphs) shuffled.push_back(permuted(g, perm));
    const double a = forward(model, pack(ppm_topology(), graphs), Mode::eval).p_keep;
    const double b = forward(model, pack(ppm_topology(), shuffled), Mode::eval).p_keep;
    worst = std::max(worst, std::abs(a - b));
  }
  return {worst <= 1e-12, "max |Δ p_keep| over 20 permutations = " + fmt(worst)};
}

// Shared between criteria 5 and 10.
std::optional<PopModel> g_ppm3d_model;

Outcome_ table_ordering() {
  const auto t0 = Clock::now();
  constexpr int kMatches = 10;
  std::vector<MatchData> matches;
  for (int i = 0; i < kMatches; ++i) {
    SynthConfig c;
    c.seed = 100 + static_cast<std::uint64_t>(i);
    c.duration_seconds = 600;
    c.press_mix = {0.2, 0.8};
    matches.push_back(simulate_match(c, "m" + std::to_string(i)).data);
  }
  const std::string test_id = "m" + std::to_string(kMatches - 1);
  std::map<PpmVariant, double> acc;
  std::size_t windows = 0, test_windows = 0, possessions = 0;
  for (auto v : {PpmVariant::tracking, PpmVariant::ppm2d, PpmVariant::ppm3d}) {
    const auto ds = build_dataset(matches, WindowSpec{}, v);
    auto [train_set, test_set] = split_by_match(ds, {test_id});
    const auto train_x = to_examples(train_set);
    const auto test_x = to_examples(test_set);
    windows = ds.size();
    test_windows = test_x.size();
    possessions = 0;
    for (const auto& s : ds.summaries) possessions += s.possessions;
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      TrainConfig tc;
      tc.hidden = 16;
      tc.learning_rate = 3e-3;
      tc.epochs = 12;
      tc.seed = seed;
      auto result = train(train_x, tc, v);
      sum += evaluate(result.model, test_x).accuracy;
      if (v == PpmVariant::ppm3d && seed == 1) g_ppm3d_model = std::move(result.model);
    }
    acc[v] = sum / 3.0;
    std::cout << "  criterion 5: " << to_string(v) << " mean test accuracy " << fmt(acc[v]) << " (" << fmt(seconds_since(t0))
              << " s)" << std::endl;
  }
  const double t = seconds_since(t0);
  const double a3 = acc[PpmVariant::ppm3d], a2 = acc[PpmVariant::ppm2d], a0 = acc[PpmVariant::tracking];
  const bool ok = windows >= 1000 && a3 >= a2 && a2 >= a0 && a3 >= 0.70 && a3 - a0 >= 0.05 && t < 600.0;
  std::ostringstream d;
  d << "tracking " << fmt(a0) << ", ppm2d " << fmt(a2) << ", ppm3d " << fmt(a3) << "; " << windows << " windows, "
    << possessions << " possessions, " << test_windows << " test windows; " << fmt(t) << " s";
  return {ok, d.str()};
}

Outcome_ level_buckets() {
  const bool ok = pressure_level(1.0 / 3.0) == PressureLevel::low &&
                  pressure_level(1.0 / 3.0 + 1e-9) == PressureLevel::medium &&
                  pressure_level(2.0 / 3.0) == PressureLevel::medium &&
                  pressure_level(2.0 / 3.0 + 1e-9) == PressureLevel::high;
  return {ok, "1/3 -> " + std::to_string(static_cast<int>(pressure_level(1.0 / 3.0))) + ", 1/3+1e-9 -> " +
                  std::to_string(static_cast<int>(pressure_level(1.0 / 3.0 + 1e-9))) + ", 2/3 -> " +
                  std::to_string(static_cast<int>(pressure_level(2.0 / 3.0))) + ", 2/3+1e-9 -> " +
                  std::to_string(static_cast<int>(pressure_level(2.0 / 3.0 + 1e-9)))};
}

Outcome_ windowing() {
  TrackingSequence seq;
  for (int i = 0; i < 600; ++i) {
    Frame f;
    f.frame_index = i;
    f.timestamp = i / kNominalFrameRate;
    seq.frames.push_back(f);
  }
  // Possessions from events: A holds for 6.2 s, then B for 4.9 s rounded up
  // to whole frames (4.92 s), then A again.
  auto ev = [](std::string id, std::string team, std::int64_t frame) {
    return Event{std::move(id), EventKind::pass, team, team + "1", frame, frame, Outcome::success, {}, {}};
  };
  const std::vector<Event> events{ev("1", "A", 0),   ev("2", "A", 100), ev("3", "B", 156),
                                  ev("4", "B", 200), ev("5", "A", 280), ev("6", "A", 500)};
  const auto all = segment_all_possessions(events, seq);
  if (all.size() < 2) return {false, "segmentation produced " + std::to_string(all.size()) + " possessions"};
  const WindowSpec spec;
  const auto long_w = make_windows(all[0], seq, spec);
  const auto short_w = make_windows(all[1], seq, spec);
  bool sizes = true;
  for (const auto& w : long_w) sizes = sizes && w.end_frame - w.start_frame + 1 == 50;
  const bool ok = std::abs(all[0].duration - 6.2) < 1e-9 && std::abs(all[1].duration - 4.9) <= 1.0 / kNominalFrameRate &&
                  long_w.size() == 9 && sizes && short_w.empty();
  return {ok, fmt(all[0].duration) + " s -> " + std::to_string(long_w.size()) + " windows" +
                  (sizes ? " of 50 frames" : " (wrong sizes)") + ", " + fmt(all[1].duration) + " s -> " +
                  std::to_string(short_w.size()) + " windows"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

/// Every file under `dir` except run logs, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "run.json") {
      out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
  }
  return out;
}

Outcome_ determinism() {
  const fs::path root = fs::temp_directory_path() / "pressmap_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> checkpoints, reports;
  std::vector<std::string> failures;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path r = root / ("run" + std::to_string(rep));
    auto step = [&](std::vector<std::string> args) {
      const int code = cli::run(args);
      if (code != cli::kExitOk) failures.push_back(args[0] + " exited " + std::to_string(code));
    };
    step({"simulate", "--seed", "21", "--press-mix", "0.2,0.8", "--duration", "300", "--matches", "2", "--out",
          (r / "data").string()});
    step({"dataset", "--data", (r / "data").string(), "--variant", "ppm3d", "--test-matches", "synthetic_1", "--out",
          (r / "dataset").string()});
    step({"train", "--data", (r / "dataset" / "train").string(), "--variant", "ppm3d", "--seed", "4", "--epochs", "3",
          "--hidden", "8", "--out", (r / "model").string()});
    step({"report", "--model", (r / "model" / "pop.ckpt").string(), "--data", (r / "data").string(), "--out",
          (r / "report").string()});
    if (!failures.empty()) break;
    checkpoints.push_back(snapshot(r / "model"));
    reports.push_back(snapshot(r / "report"));
  }
  fs::remove_all(root);
  if (!failures.empty()) return {false, failures.front()};
  const bool same_ckpt = checkpoints[0] == checkpoints[1] && checkpoints[0].count("pop.ckpt");
  const bool same_report = reports[0] == reports[1] && !reports[0].empty();
  return {same_ckpt && same_report, std::string("checkpoint ") + (same_ckpt ? "identical" : "differs") + ", " +
                                        std::to_string(reports[0].size()) + " report files " +
                                        (same_report ? "identical" : "differ")};
}

Outcome_ amplifier_sanity() {
  Rng rng(9);
  std::vector<AmplifierSample> samples;
  for (int i = 0; i < 2000; ++i) {
    AmplifierSample s;
    s.theta = rng.uniform(-std::numbers::pi, std::numbers::pi);
    for (double& v : s.vanilla.values) v = rng.uniform(0.05, 0.4);
    const int front = orientation_bin(s.theta);
    const bool planted = rng.bernoulli(0.3);
    if (planted) s.vanilla.values[front] = rng.uniform(0.7, 1.0);
    s.outcome = planted ? Outcome::failure : Outcome::success;
    samples.push_back(s);
  }
  const auto amp = estimate_amplifier(samples);
  const auto& w = amp.weights;
  const int arg = static_cast<int>(std::max_element(w.begin(), w.end()) - w.begin());
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / kDirections;
  std::ostringstream d;
  d << "argmax " << arg << ", mean " << fmt(mean) << ", weights [";
  for (int k = 0; k < kDirections; ++k) d << (k ? " " : "") << fmt(w[k]);
  d << "]";
  return {arg == 0 && std::abs(mean - 1.0) <= 1e-9, d.str()};
}

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = 0.5 * static_cast<double>(i + j);
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Outcome_ scripted_series() {
  if (!g_ppm3d_model) {
    // Criterion 5 was skipped: train the same model on a smaller set.
    std::vector<MatchData> matches;
    for (int i = 0; i < 4; ++i) {
      SynthConfig c;
      c.seed = 100 + static_cast<std::uint64_t>(i);
      c.press_mix = {0.2, 0.8};
      matches.push_back(simulate_match(c, "m" + std::to_string(i)).data);
    }
    TrainConfig tc;
    tc.hidden = 16;
    tc.learning_rate = 3e-3;
    tc.epochs = 12;
    tc.seed = 1;
    g_ppm3d_model = train(to_examples(build_dataset(matches, WindowSpec{}, PpmVariant::ppm3d)), tc,
                          PpmVariant::ppm3d)
                        .model;
  }
  const PressScript script{{{0.0, 0.1}, {6.0, 0.9}, {12.0, 0.1}}};
  SynthConfig c;
  c.seed = 5;
  const auto match = simulate_scripted_press(c, script);
  const MatchContext ctx(match.data);
  if (ctx.possessions().size() != 1) {
    return {false, "scripted match has " + std::to_string(ctx.possessions().size()) + " possessions"};
  }
  const Possession& poss = ctx.possessions().front();
  const auto series = team_pressure_series(*g_ppm3d_model, ctx, poss, WindowSpec{});
  const double window = (kFramesPerWindow - 1) / kNominalFrameRate;
  std::vector<double> rise, fall, pressure, intensity;
  for (const auto& s : series.samples) {
    const double t_end = static_cast<double>(s.frame_index - poss.start_frame) / kNominalFrameRate;
    double mean = 0.0;
    for (int k = 0; k < kFramesPerWindow; ++k) mean += script.at(t_end - k / kNominalFrameRate);
    pressure.push_back(s.team_pressure);
    intensity.push_back(mean / kFramesPerWindow);
    if (t_end <= 6.0) rise.push_back(s.team_pressure);
    if (t_end - window >= 6.0 && t_end <= 12.0) fall.push_back(s.team_pressure);
  }
  const bool up = std::is_sorted(rise.begin(), rise.end());
  const bool down = std::is_sorted(fall.rbegin(), fall.rend());
  const double rho = spearman(pressure, intensity);
  std::ostringstream d;
  d << series.samples.size() << " windows; rising on [0, 6] s: " << (up ? "yes" : "no") << " (" << rise.size()
    << "), falling on [6, 12] s: " << (down ? "yes" : "no") << " (" << fall.size() << "), Spearman " << fmt(rho)
    << "; series";
  for (double p : pressure) d << ' ' << std::fixed << std::setprecision(3) << p;
  return {up && down && rise.size() >= 2 && fall.size() >= 2 && rho >= 0.8, d.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome_()>>> criteria = {
      {"pitch-control complement", complement},
      {"pressure-circle oracle equality", oracle_equality},
      {"gradient check", gradient},
      {"permutation invariance", permutation},
      {"variant accuracy ordering on synthetic matches", table_ordering},
      {"pressure level buckets", level_buckets},
      {"windowing arithmetic", windowing},
      {"end-to-end determinism", determinism},
      {"amplifier estimation sanity", amplifier_sanity},
      {"scripted press series", scripted_series}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome_ r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::cout << (r.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << criteria[i].first << " | " << r.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
