#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pressmap/datamodel.hpp"
#include "pressmap/pitch_control.hpp"

namespace pressmap {

/// Per-frame loss hazard of the ball carrier:
/// h = σ(c0 + c1·mean + β·front), with mean the scalar vanilla pressure on
/// the carrier and front the mean of the three components around the
/// facing direction. A negative c1 makes the hazard depend on how much of
/// the pressure sits in front of the body.
struct HazardModel {
  double c0 = -18.0;
  double c1 = -70.0;
  double beta = 100.0;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  double duration_seconds = 600.0;
  double press_intensity = 0.5;           // λ in [0, 1]
  /// When non-empty, each possession draws λ uniformly from this list.
  std::vector<double> press_mix;
  double orientation_effect = HazardModel{}.beta;  // β ≥ 0
  double pass_rate = 0.45;                // passes per second of holding
  PitchSpec pitch;
  double attacker_max_speed = 7.0;
  double defender_max_speed = 7.5;
  double min_possession_seconds = 7.0;    // planned possession length range,
  double max_possession_seconds = 15.0;   // ended by a shot and a stoppage
  double grace_seconds = 5.0;             // no losses right after gaining the ball
  double press_ramp_seconds = 3.0;        // defenders reach full intensity after this
  double pressed_hold_factor = 1.5;       // mean hold time grows by this × λ
  /// Share of possessions played direct (passes aimed forward); the rest
  /// are patient and aim passes backwards.
  double direct_share = 0.8;
  double style_bias = 3.0;
  double hazard_c0 = HazardModel{}.c0;
  double hazard_c1 = HazardModel{}.c1;
  /// Forces the per-frame hazard when set, grace period included.
  std::optional<double> hazard_override;

  /// Throws ValidationError on out-of-range values.
  void validate() const;
  HazardModel hazard() const { return {hazard_c0, hazard_c1, orientation_effect}; }
};

struct PossessionLog {
  int index = 0;
  std::string team;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  double press_intensity = 0.0;
  std::string style;    // "direct" or "patient"
  std::string outcome;  // "lost", "stoppage" or "end_of_data"
};

struct SynthMatch {
  MatchData data;
  SynthConfig config;
  std::vector<PossessionLog> possessions;

  /// Fraction of finished possessions of intensity `lambda` that were lost.
  double loss_rate(double lambda) const;
};

/// Generates one 11v11 match. Same config, same output.
SynthMatch simulate_match(const SynthConfig& config, std::string match_id = "synthetic");

/// Piecewise-linear press intensity over possession time (seconds).
struct PressScript {
  std::vector<std::pair<double, double>> points;  // (time, λ), times increasing
  double at(double t) const;
  double duration() const { return points.empty() ? 0.0 : points.back().first; }
};

/// A match with a single hazard-free possession of the home team whose
/// press intensity follows `script`, closed by a stoppage.
SynthMatch simulate_scripted_press(const SynthConfig& config, const PressScript& script,
                                   std::string match_id = "scripted");

struct OracleEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
  std::size_t rollouts = 0;
};

/// Monte-Carlo probability that the team in possession at `frame` loses the
/// ball within `horizon_seconds`. The state at `frame` is reproduced from
/// config.seed; rollout randomness comes from `rollout_seed`.
OracleEstimate oracle_loss_probability(const SynthConfig& config, std::int64_t frame, std::size_t rollouts = 10000,
                                       std::uint64_t rollout_seed = 0, double horizon_seconds = 4.0);

inline constexpr std::string_view kSynthManifestFile = "manifest.json";

/// tracking.csv, events.csv, orientations.csv and manifest.json.
void write_synth_match(const std::filesystem::path& dir, const SynthMatch& match);

}  // namespace pressmap
