#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "pressmap/analytics.hpp"
#include "pressmap/error.hpp"
#include "pressmap/gradcheck.hpp"
#include "pressmap/parallel.hpp"
#include "pressmap/pipeline.hpp"
#include "pressmap/synth.hpp"
#include "pressmap/text.hpp"
#include "pressmap/tracking_io.hpp"
#include "pressmap/trainer.hpp"

#ifndef PRESSMAP_VERSION
#define PRESSMAP_VERSION "unknown"
#endif

namespace pressmap::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr std::string_view kCheckpointFile = "pop.ckpt";

/// Failure with an exit code and a one-line reason.
struct Failure : std::runtime_error {
  Failure(int code, const std::string& reason) : std::runtime_error(reason), code(code) {}
  int code;
};

Failure data_error(const std::string& reason) { return {kExitData, reason}; }

// Every flag of every subcommand; each subcommand registers what it reads.
struct Options {
  std::string out;
  std::string config;
  unsigned jobs = 1;
  std::uint64_t seed = 1;

  std::string data;
  std::string model;
  std::string amplifier;
  std::string roster;
  std::string variant = "ppm3d";
  std::string pressure_variant = "amplified";
  std::vector<std::string> test_matches;
  std::string match;

  ControlParams control;
  double radius = kPressureRadius;
  WindowSpec window;
  TrainConfig train;
  std::string optimizer = "adam";

  // simulate
  double press = 0.5;
  std::vector<double> press_mix;
  double duration = 600.0;
  int matches = 1;
  std::string match_id = "synthetic";
  std::string script;
  SynthConfig synth;

  // pressure, predict
  std::optional<std::int64_t> first_frame;
  std::optional<std::int64_t> last_frame;
  std::optional<int> possession;
  std::optional<std::int64_t> window_end;

  std::size_t min_samples = kMinAmplifierSamples;
  std::size_t min_attempts = kMinPassAttempts;

  // gradcheck
  double step = 1e-6;
  double tolerance = 1e-4;
  int toy_hidden = 5;
  int toy_graphs = 3;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--out", o.out, "Output directory (created if missing)")->required();
  sub->add_option("--config", o.config, "key = value file of flag defaults; command-line flags win");
  sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

void add_data(CLI::App* sub, Options& o) {
  sub->add_option("--data", o.data, "Match directory, or a directory of match directories")->required();
}

void add_features(CLI::App* sub, Options& o) {
  sub->add_option("--reaction-time", o.control.reaction_time, "Pitch-control reaction time (s)");
  sub->add_option("--max-speed", o.control.max_speed, "Pitch-control player speed (m/s)");
  sub->add_option("--logistic-scale", o.control.logistic_scale, "Pitch-control logistic scale (s)");
  sub->add_option("--radius", o.radius, "Pressure circle radius (m)");
  sub->add_option("--amplifier", o.amplifier, "Amplifier CSV (relative_direction,weight); built-in weights if absent");
}

void add_window(CLI::App* sub, Options& o) {
  sub->add_option("--stride", o.window.stride_seconds, "Window stride (s)");
  sub->add_option("--horizon", o.window.horizon_seconds, "Label horizon after the window end (s)");
  sub->add_option("--min-possession", o.window.min_possession_seconds, "Shortest labelled possession (s)");
}

void add_variant(CLI::App* sub, Options& o) {
  sub->add_option("--variant", o.variant, "PPM variant")->check(CLI::IsMember({"tracking", "ppm2d", "ppm3d"}));
}

void add_split(CLI::App* sub, Options& o) {
  sub->add_option("--test-matches", o.test_matches, "Match ids held out for testing (comma separated)")
      ->delimiter(',');
}

void add_training(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed, "Seed for initialization, shuffling and dropout");
  sub->add_option("--lr", o.train.learning_rate, "Learning rate");
  sub->add_option("--batch", o.train.batch_size, "Mini-batch size");
  sub->add_option("--epochs", o.train.epochs, "Training epochs");
  sub->add_option("--hidden", o.train.hidden, "Hidden width");
  sub->add_option("--dropout", o.train.dropout, "Dropout rate on the pooled embedding");
  sub->add_option("--train-fraction", o.train.train_fraction, "Share of possessions used for fitting");
  sub->add_option("--optimizer", o.optimizer, "Optimizer")->check(CLI::IsMember({"adam", "sgd"}));
}

// ---------------------------------------------------------------------------
// Config file: `key = value` lines, '#' comments. Keys are long flag names.

std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure(kExitUsage, "config file not found: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (text::read_line(in, line)) {
    ++line_no;
    auto body = text::trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Failure(kExitUsage, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(text::trim(body.substr(0, eq)));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    out[key] = std::string(text::trim(body.substr(eq + 1)));
  }
  return out;
}

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

/// Inserts config-file values as flags right after the subcommand name,
/// skipping keys already given on the command line.
std::vector<std::string> merge_config(CLI::App& app, std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.empty()) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[0]);
  } catch (const CLI::OptionNotFound&) {
    return args;  // the parser reports the bad subcommand
  }
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config(path)) {
    const std::string flag = "--" + key;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (!opt || key == "config") throw Failure(kExitUsage, "config key not a flag of " + args[0] + ": " + key);
    if (given_on_command_line(args, flag)) continue;
    if (opt->get_type_size_max() == 0) {
      if (value == "true" || value == "1") injected.push_back(flag);
      continue;
    }
    injected.push_back(flag);
    injected.push_back(value);
  }
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

// ---------------------------------------------------------------------------

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Collects the files a subcommand writes.
class Outputs {
 public:
  explicit Outputs(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const { return root_; }

  template <typename Writer>
  void write(const fs::path& relative, Writer&& writer) {
    const fs::path p = root_ / relative;
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw data_error("cannot write " + p.string());
    writer(out);
    if (!out) throw data_error("write failed: " + p.string());
    paths_.push_back(p.string());
  }

  void json_file(const fs::path& relative, const json& j) {
    write(relative, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  }

  void add_directory(const fs::path& relative) { paths_.push_back((root_ / relative).string()); }

  const std::vector<std::string>& paths() const { return paths_; }

 private:
  fs::path root_;
  std::vector<std::string> paths_;
};

std::vector<MatchData> load_data(const std::string& dir) {
  if (!fs::is_directory(dir)) throw data_error("data directory not found: " + dir);
  auto matches = load_matches(dir);
  if (matches.empty()) throw data_error("no match data under " + dir);
  return matches;
}

FeatureConfig feature_config(const Options& o) {
  FeatureConfig f;
  f.control = o.control;
  f.radius = o.radius;
  if (!o.amplifier.empty()) {
    std::ifstream in(o.amplifier);
    if (!in) throw data_error("amplifier file not found: " + o.amplifier);
    f.amplifier = parse_amplifier(in);
  }
  return f;
}

PpmVariant variant_of(const Options& o) { return *parse_ppm_variant(o.variant); }

PopModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("checkpoint not found: " + path);
  return load_checkpoint(in);
}

/// Per-match output prefix: none for a single match, the match id otherwise.
fs::path match_prefix(const std::vector<MatchData>& matches, const std::string& match_id) {
  return matches.size() == 1 ? fs::path{} : fs::path{match_id};
}

json evaluation_json(const Evaluation& e) {
  return {{"accuracy", e.accuracy},
          {"mean_loss", e.mean_loss},
          {"total", e.total},
          {"confusion", {{"lose_as_lose", e.confusion[0][0]},
                         {"lose_as_keep", e.confusion[0][1]},
                         {"keep_as_lose", e.confusion[1][0]},
                         {"keep_as_keep", e.confusion[1][1]}}}};
}

json summaries_json(const Dataset& ds) {
  json rows = json::array();
  for (const auto& s : ds.summaries) {
    rows.push_back({{"match_id", s.match_id},
                    {"possessions", s.possessions},
                    {"windows", s.windows},
                    {"keep", s.keep},
                    {"lose", s.lose},
                    {"skipped_windows", s.skipped_windows}});
  }
  return rows;
}

PressScript parse_script(const std::string& spec) {
  PressScript script;
  for (auto token : text::split(spec)) {
    const auto colon = token.find(':');
    const auto t = colon == std::string_view::npos ? std::nullopt : text::parse_double(token.substr(0, colon));
    const auto lambda = colon == std::string_view::npos ? std::nullopt : text::parse_double(token.substr(colon + 1));
    if (!t || !lambda) throw Failure(kExitUsage, "press script expects time:intensity pairs, got " + std::string(token));
    script.points.emplace_back(*t, *lambda);
  }
  return script;
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns the seed to record in the run log.

std::uint64_t do_simulate(const Options& o, Outputs& out) {
  SynthConfig c = o.synth;
  c.seed = o.seed;
  c.press_intensity = o.press;
  c.press_mix = o.press_mix;
  c.duration_seconds = o.duration;
  if (!o.script.empty()) {
    if (o.matches != 1) throw Failure(kExitUsage, "--script generates a single match");
    const auto m = simulate_scripted_press(c, parse_script(o.script), o.match_id);
    write_synth_match(out.root(), m);
    out.add_directory(".");
    return o.seed;
  }
  if (o.matches == 1) {
    write_synth_match(out.root(), simulate_match(c, o.match_id));
    out.add_directory(".");
    return o.seed;
  }
  std::vector<SynthMatch> results(static_cast<std::size_t>(o.matches));
  parallel_for(results.size(), o.jobs, [&](std::size_t i) {
    SynthConfig ci = c;
    ci.seed = o.seed + i;
    results[i] = simulate_match(ci, o.match_id + "_" + std::to_string(i));
  });
  for (const auto& m : results) {
    write_synth_match(out.root() / m.data.match_id, m);
    out.add_directory(m.data.match_id);
  }
  return o.seed;
}

std::uint64_t do_ingest(const Options& o, Outputs& out) {
  const auto matches = load_data(o.data);
  json summary = json::array();
  for (const auto& m : matches) {
    const auto warnings = check_event_frames(m.events, m.tracking);
    const MatchContext ctx(m);
    const fs::path dir = match_prefix(matches, m.match_id);
    out.write(dir / kTrackingFile, [&](std::ostream& s) { write_tracking(s, ctx.tracking()); });
    out.write(dir / kEventsFile, [&](std::ostream& s) { write_events(s, ctx.events()); });
    out.write(dir / kOrientationsFile, [&](std::ostream& s) { write_orientations(s, ctx.orientation_records()); });
    std::size_t qualifying = 0;
    for (const auto& p : ctx.possessions()) qualifying += p.duration > o.window.min_possession_seconds;
    summary.push_back({{"match_id", m.match_id},
                       {"frames", ctx.tracking().frames.size()},
                       {"events", ctx.events().size()},
                       {"orientations", ctx.orientation_records().size()},
                       {"possessions", ctx.possessions().size()},
                       {"qualifying_possessions", qualifying},
                       {"warnings", warnings}});
  }
  out.json_file("ingest.json", summary);
  return 0;
}

std::uint64_t do_pressure(const Options& o, Outputs& out) {
  const auto matches = load_data(o.data);
  const FeatureConfig features = feature_config(o);
  const PpmVariant variant = o.pressure_variant == "vanilla" ? PpmVariant::ppm2d : PpmVariant::ppm3d;
  for (const auto& m : matches) {
    const MatchContext ctx(m, features);
    std::vector<PressureRow> rows;
    for (const auto& poss : ctx.possessions()) {
      const auto first = std::max(poss.start_frame, o.first_frame.value_or(poss.start_frame));
      const auto last = std::min(poss.end_frame, o.last_frame.value_or(poss.end_frame));
      for (auto f = first; f <= last; ++f) {
        for (const auto& [id, v] : ctx.pressures(f, poss.team, variant)) {
          if (id != kBallId) rows.push_back({f, id, v});
        }
      }
    }
    out.write(match_prefix(matches, m.match_id) / "pressure.csv",
              [&](std::ostream& s) { write_pressure_dump(s, rows); });
  }
  return 0;
}

std::uint64_t do_amplifier(const Options& o, Outputs& out) {
  const auto matches = load_data(o.data);
  const FeatureConfig features = feature_config(o);
  std::vector<AmplifierSample> samples;
  for (const auto& m : matches) {
    const auto s = pass_amplifier_samples(MatchContext(m, features));
    samples.insert(samples.end(), s.begin(), s.end());
  }
  const auto amp = estimate_amplifier(samples, o.min_samples);
  out.write("amplifier.csv", [&](std::ostream& s) { write_amplifier(s, amp); });
  std::size_t failures = 0;
  for (const auto& s : samples) failures += s.outcome == Outcome::failure;
  out.json_file("amplifier.json", {{"samples", samples.size()}, {"failures", failures}, {"weights", amp.weights}});
  return 0;
}

Dataset build(const Options& o, const std::vector<MatchData>& matches) {
  return build_dataset(matches, o.window, variant_of(o), feature_config(o), o.jobs);
}

std::uint64_t do_dataset(const Options& o, Outputs& out) {
  const auto matches = load_data(o.data);
  const Dataset ds = build(o, matches);
  json summary = {{"variant", o.variant}, {"windows", ds.size()}, {"matches", summaries_json(ds)},
                  {"warnings", ds.warnings}};
  if (o.test_matches.empty()) {
    write_dataset(out.root(), ds);
    out.add_directory(".");
  } else {
    const auto [train_set, test_set] = split_by_match(ds, o.test_matches);
    write_dataset(out.root() / "train", train_set);
    write_dataset(out.root() / "test", test_set);
    out.add_directory("train");
    out.add_directory("test");
    summary["train_windows"] = train_set.size();
    summary["test_windows"] = test_set.size();
  }
  out.json_file("dataset.json", summary);
  return 0;
}

/// A prepared dataset directory (manifest.csv) or raw match data.
Dataset training_data(const Options& o) {
  if (fs::exists(fs::path(o.data) / kManifestFile)) {
    Dataset ds = read_dataset(o.data);
    if (ds.size() > 0 && ds.variant != variant_of(o)) {
      throw data_error("dataset variant " + std::string(to_string(ds.variant)) + " does not match --variant " +
                       o.variant);
    }
    return ds;
  }
  return build(o, load_data(o.data));
}

std::uint64_t do_train(const Options& o, Outputs& out) {
  TrainConfig tc = o.train;
  tc.seed = o.seed;
  tc.jobs = o.jobs;
  tc.optimizer = o.optimizer == "sgd" ? OptimizerKind::sgd_momentum : OptimizerKind::adam;
  try {
    tc.validate();
  } catch (const ValidationError& e) {
    throw Failure(kExitUsage, e.what());
  }
  const Dataset all = training_data(o);
  Dataset train_set = all, test_set;
  if (!o.test_matches.empty()) std::tie(train_set, test_set) = split_by_match(all, o.test_matches);
  const auto examples = to_examples(train_set);
  const TrainResult r = train(examples, tc, variant_of(o));
  out.write(kCheckpointFile, [&](std::ostream& s) { save_checkpoint(s, r.model); });
  out.write("metrics.csv", [&](std::ostream& s) { write_metrics(s, r.history); });
  json summary = {{"variant", o.variant},
                  {"train_windows", examples.size()},
                  {"best_epoch", r.best_epoch},
                  {"best_validation_accuracy", r.best_validation_accuracy}};
  if (!o.test_matches.empty()) {
    const auto test_examples = to_examples(test_set);
    summary["test"] = evaluation_json(evaluate(r.model, test_examples, o.jobs));
  }
  out.json_file("training.json", summary);
  return o.seed;
}

const MatchData& pick_match(const std::vector<MatchData>& matches, const std::string& id) {
  if (id.empty()) {
    if (matches.size() != 1) throw Failure(kExitUsage, "--match is required when the data holds several matches");
    return matches.front();
  }
  for (const auto& m : matches) {
    if (m.match_id == id) return m;
  }
  throw data_error("match not found: " + id);
}

std::uint64_t do_predict(const Options& o, Outputs& out) {
  const PopModel model = load_model(o.model);
  const auto matches = load_data(o.data);
  const MatchContext ctx(pick_match(matches, o.match), feature_config(o));
  const Possession& poss = ctx.possession(*o.possession);
  PressureSeries series;
  if (o.window_end) {
    const auto end = *o.window_end;
    const auto start = end - kFramesPerWindow + 1;
    if (!poss.contains(start) || !poss.contains(end)) {
      throw data_error("window ending at frame " + std::to_string(end) + " does not fit inside possession " +
                       std::to_string(poss.id));
    }
    series.possession_id = poss.id;
    const auto pred = predict_pop(model, ctx.sequence(poss, start, model.variant()));
    series.samples.push_back({end, ctx.frame(end).timestamp, pred.team_pressure});
  } else {
    series = team_pressure_series(model, ctx, poss, o.window);
  }
  out.write("predictions.csv", [&](std::ostream& s) { write_pressure_series(s, series); });
  write_pressure_series(std::cout, series);
  return 0;
}

json pass_rows_json(const std::vector<PassAccuracyRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"subject", r.subject},
                   {"subject_type", r.is_group ? "group" : "player"},
                   {"level", static_cast<int>(r.level)},
                   {"attempts", r.attempts},
                   {"successes", r.successes},
                   {"accuracy", r.accuracy},
                   {"low_sample", r.low_sample}});
  }
  return out;
}

std::uint64_t do_report(const Options& o, Outputs& out) {
  const PopModel model = load_model(o.model);
  const auto matches = load_data(o.data);
  const FeatureConfig features = feature_config(o);
  std::optional<Roster> roster;
  if (!o.roster.empty()) {
    std::ifstream in(o.roster);
    if (!in) throw data_error("roster file not found: " + o.roster);
    roster = parse_roster(in);
  }
  const bool several = matches.size() > 1;
  auto qualify = [&](const std::string& match_id, const std::string& id) { return several ? match_id + ":" + id : id; };

  std::vector<Event> passes;
  std::map<std::string, double> pass_pressure;
  std::vector<EventDelta> deltas;
  json skipped = json::array();
  json series_json = json::array();
  for (const auto& m : matches) {
    const MatchContext ctx(m, features);
    for (const auto& [id, p] : pass_pressures(ctx)) pass_pressure[qualify(m.match_id, id)] = p;
    for (Event e : ctx.events()) {
      if (e.kind != EventKind::pass) continue;
      e.event_id = qualify(m.match_id, e.event_id);
      passes.push_back(std::move(e));
    }

    std::vector<const Possession*> eligible;
    for (const auto& p : ctx.possessions()) {
      if (!window_grid(p, o.window).empty()) eligible.push_back(&p);
    }
    std::vector<PressureSeries> series(eligible.size());
    parallel_for(eligible.size(), o.jobs,
                 [&](std::size_t i) { series[i] = team_pressure_series(model, ctx, *eligible[i], o.window); });
    for (const auto& s : series) {
      out.write(match_prefix(matches, m.match_id) / ("pressure_series_" + std::to_string(s.possession_id) + ".csv"),
                [&](std::ostream& f) { write_pressure_series(f, s); });
      json samples = json::array();
      for (const auto& x : s.samples) {
        samples.push_back({{"frame", x.frame_index}, {"timestamp", x.timestamp}, {"team_pressure", x.team_pressure}});
      }
      series_json.push_back({{"match_id", m.match_id}, {"possession_id", s.possession_id}, {"samples", samples}});
    }

    std::vector<const Event*> candidates;
    for (const auto& e : ctx.events()) {
      if (e.kind == EventKind::pass || e.kind == EventKind::dribble) candidates.push_back(&e);
    }
    std::vector<DeltaResult> results(candidates.size());
    parallel_for(candidates.size(), o.jobs,
                 [&](std::size_t i) { results[i] = event_pressure_delta(model, ctx, *candidates[i]); });
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (results[i].delta) {
        EventDelta d = *results[i].delta;
        d.event_id = qualify(m.match_id, d.event_id);
        deltas.push_back(std::move(d));
      } else {
        skipped.push_back({{"event_id", qualify(m.match_id, candidates[i]->event_id)}, {"reason", results[i].reason}});
      }
    }
  }

  const auto accuracy = passing_accuracy_by_level(passes, pass_pressure, roster ? &*roster : nullptr, o.min_attempts);
  const auto player_rows = player_delta_summary(deltas);
  out.write("pass_accuracy.csv", [&](std::ostream& s) { write_pass_accuracy(s, accuracy.rows); });
  out.write("event_deltas.csv", [&](std::ostream& s) { write_event_deltas(s, deltas); });
  out.write("player_deltas.csv", [&](std::ostream& s) { write_player_deltas(s, player_rows); });

  json delta_json = json::array();
  for (const auto& d : deltas) {
    delta_json.push_back({{"event_id", d.event_id},
                          {"kind", to_string(d.kind)},
                          {"player_id", d.player_id},
                          {"pressure_start", d.pressure_start},
                          {"pressure_end", d.pressure_end},
                          {"delta", d.delta}});
  }
  json player_json = json::array();
  for (const auto& r : player_rows) {
    player_json.push_back(
        {{"player_id", r.player_id}, {"kind", to_string(r.kind)}, {"mean_delta", r.mean_delta}, {"count", r.count}});
  }
  out.json_file("report.json", {{"variant", to_string(model.variant())},
                                {"pass_accuracy", pass_rows_json(accuracy.rows)},
                                {"pass_accuracy_skipped", accuracy.skipped},
                                {"pressure_series", series_json},
                                {"event_deltas", delta_json},
                                {"event_deltas_skipped", skipped},
                                {"player_deltas", player_json}});
  return 0;
}

std::uint64_t do_gradcheck(const Options& o, Outputs& out) {
  ModelDims dims{4, 3, o.toy_hidden};
  const PopModel model = PopModel::initialized(dims, o.seed, 0.5);
  std::ostringstream csv;
  csv << "topology,block,parameters,max_relative_error\n";
  double worst = 0.0;
  for (bool complete : {true, false}) {
    const auto input = toy_sequence(dims, o.toy_graphs, complete, o.seed + 1);
    for (int label : {kLabelLose, kLabelKeep}) {
      const auto report = gradient_check(model, input, label, o.seed + 2, o.step);
      for (const auto& b : report.blocks) {
        csv << (complete ? "complete" : "path") << '/' << label << ',' << b.name << ',' << b.parameters << ','
            << text::format_double(b.max_relative_error) << '\n';
      }
      worst = std::max(worst, report.max_relative_error);
    }
  }
  out.write("gradcheck.csv", [&](std::ostream& s) { s << csv.str(); });
  std::cout << "max relative error " << text::format_double(worst) << " (tolerance "
            << text::format_double(o.tolerance) << ")\n";
  if (!(worst < o.tolerance)) {
    throw Failure(kExitTraining, "gradient check failed: max relative error " + text::format_double(worst));
  }
  return o.seed;
}

json config_echo(const CLI::App* sub) {
  json config = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help") continue;
    const auto& results = opt->results();
    if (opt->get_type_size_max() == 0) {
      config[name] = !results.empty();
    } else if (results.empty()) {
      config[name] = opt->get_default_str();
    } else {
      config[name] = text::join(results, ',');
    }
  }
  return config;
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  Options o;
  CLI::App app{"Pressure maps, possession-outcome model and analytics for soccer tracking data", "pressmap"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", PRESSMAP_VERSION);

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic match with a known loss hazard");
  add_common(simulate, o);
  simulate->add_option("--seed", o.seed, "Generator seed");
  simulate->add_option("--press", o.press, "Press intensity in [0, 1]");
  simulate->add_option("--press-mix", o.press_mix, "Intensities drawn per possession (comma separated)")
      ->delimiter(',');
  simulate->add_option("--beta", o.synth.orientation_effect, "Weight of front-of-body pressure in the hazard");
  simulate->add_option("--duration", o.duration, "Match length (s)");
  simulate->add_option("--pass-rate", o.synth.pass_rate, "Passes per second of holding");
  simulate->add_option("--matches", o.matches, "Number of matches; seeds increase by one per match")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--match-id", o.match_id, "Match id (suffixed with _i for several matches)");
  simulate->add_option("--script", o.script,
                       "Scripted press time:intensity points, e.g. 0:0.1,6:0.9,12:0.1 (one hazard-free possession)");

  auto* ingest = app.add_subcommand("ingest", "Validate, resample to 25 Hz and derive velocities");
  add_common(ingest, o);
  add_data(ingest, o);
  add_window(ingest, o);

  auto* pressure = app.add_subcommand("pressure", "Dump pressure vectors and levels of the team in possession");
  add_common(pressure, o);
  add_data(pressure, o);
  add_features(pressure, o);
  pressure->add_option("--pressure-variant", o.pressure_variant, "vanilla or amplified")
      ->check(CLI::IsMember({"vanilla", "amplified"}));
  pressure->add_option("--first-frame", o.first_frame, "First frame to dump");
  pressure->add_option("--last-frame", o.last_frame, "Last frame to dump");

  auto* amplifier = app.add_subcommand("amplifier", "Estimate amplifier weights from pass outcomes");
  add_common(amplifier, o);
  add_data(amplifier, o);
  add_features(amplifier, o);
  amplifier->add_option("--min-samples", o.min_samples, "Fewest passes accepted");

  auto* dataset = app.add_subcommand("dataset", "Build labelled PPM windows and split by match");
  add_common(dataset, o);
  add_data(dataset, o);
  add_features(dataset, o);
  add_window(dataset, o);
  add_variant(dataset, o);
  add_split(dataset, o);

  auto* train_cmd = app.add_subcommand("train", "Train the possession-outcome model");
  add_common(train_cmd, o);
  train_cmd->add_option("--data", o.data, "Dataset directory (manifest.csv) or match data")->required();
  add_features(train_cmd, o);
  add_window(train_cmd, o);
  add_variant(train_cmd, o);
  add_split(train_cmd, o);
  add_training(train_cmd, o);

  auto* predict = app.add_subcommand("predict", "Team pressure for one window or a whole possession");
  add_common(predict, o);
  add_data(predict, o);
  add_features(predict, o);
  add_window(predict, o);
  predict->add_option("--model", o.model, "Checkpoint file")->required();
  predict->add_option("--match", o.match, "Match id when the data holds several matches");
  predict->add_option("--possession", o.possession, "Possession id")->required();
  predict->add_option("--window-end", o.window_end, "Last frame of a single window; the whole series if absent");

  auto* report = app.add_subcommand("report", "Passing accuracy by level, pressure series and event deltas");
  add_common(report, o);
  add_data(report, o);
  add_features(report, o);
  add_window(report, o);
  report->add_option("--model", o.model, "Checkpoint file")->required();
  report->add_option("--roster", o.roster, "Roster CSV player_id,position_group");
  report->add_option("--min-attempts", o.min_attempts, "Attempts below which a row is flagged low_sample");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the model gradients");
  add_common(gradcheck, o);
  gradcheck->add_option("--seed", o.seed, "Seed for the toy model and inputs");
  gradcheck->add_option("--step", o.step, "Central-difference step");
  gradcheck->add_option("--tolerance", o.tolerance, "Largest accepted relative error");
  gradcheck->add_option("--hidden", o.toy_hidden, "Hidden width of the toy model")->check(CLI::PositiveNumber);
  gradcheck->add_option("--graphs", o.toy_graphs, "Graphs per toy sequence")->check(CLI::PositiveNumber);

  const std::vector<std::pair<CLI::App*, std::uint64_t (*)(const Options&, Outputs&)>> handlers = {
      {simulate, do_simulate}, {ingest, do_ingest}, {pressure, do_pressure},   {amplifier, do_amplifier},
      {dataset, do_dataset},   {train_cmd, do_train}, {predict, do_predict}, {report, do_report},
      {gradcheck, do_gradcheck}};

  try {
    auto args = merge_config(app, raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[" << kExitUsage << "]: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Failure& e) {
    std::cerr << "error[" << e.code << "]: " << e.what() << '\n';
    return e.code;
  }

  CLI::App* sub = nullptr;
  std::uint64_t (*handler)(const Options&, Outputs&) = nullptr;
  for (const auto& [s, h] : handlers) {
    if (app.got_subcommand(s)) {
      sub = s;
      handler = h;
    }
  }

  Outputs out(o.out);
  const std::string started = utc_now();
  int code = kExitOk;
  std::string status = "ok";
  std::uint64_t seed = o.seed;
  try {
    fs::create_directories(out.root());
    seed = handler(o, out);
  } catch (const Failure& e) {
    code = e.code;
    status = e.what();
  } catch (const TrainingError& e) {
    code = kExitTraining;
    status = e.what();
  } catch (const ModelError& e) {
    code = kExitTraining;
    status = e.what();
  } catch (const std::exception& e) {
    code = kExitData;
    status = e.what();
  }
  if (code != kExitOk) std::cerr << "error[" << code << "]: " << status << '\n';

  json log = {{"subcommand", sub->get_name()},
              {"version", PRESSMAP_VERSION},
              {"config", config_echo(sub)},
              {"seed", seed},
              {"started", started},
              {"finished", utc_now()},
              {"outputs", out.paths()},
              {"status", status}};
  std::error_code ec;
  if (fs::is_directory(out.root(), ec)) {
    std::ofstream f(out.root() / "run.json");
    f << log.dump(2) << '\n';
  }
  return code;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace pressmap::cli
