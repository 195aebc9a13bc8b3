#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pressmap/gnn.hpp"
#include "pressmap/pipeline.hpp"
#include "pressmap/pressure.hpp"

namespace pressmap {

enum class PositionGroup { defender, midfielder, attacker };
std::string_view to_string(PositionGroup group);
std::optional<PositionGroup> parse_position_group(std::string_view token);

/// player_id -> position group, from CSV `player_id,position_group`.
using Roster = std::map<std::string, PositionGroup, std::less<>>;
Roster parse_roster(std::istream& in);

struct PassAccuracyRow {
  std::string subject;     // player id or position group name
  bool is_group = false;
  PressureLevel level = PressureLevel::low;
  std::size_t attempts = 0;
  std::size_t successes = 0;
  double accuracy = 0.0;
  bool low_sample = false;  // attempts below the minimum
};

struct PassAccuracyReport {
  std::vector<PassAccuracyRow> rows;
  std::vector<std::string> skipped;  // "event_id: reason"
};

inline constexpr std::size_t kMinPassAttempts = 10;

/// Passing accuracy per (player, level) and, with a roster, per (group,
/// level). `pressure_by_event` maps a pass id to the passer's scalar pressure
/// at the pass start; passes without an entry are skipped and reported.
/// Levels with no attempts produce no row.
PassAccuracyReport passing_accuracy_by_level(const std::vector<Event>& events,
                                             const std::map<std::string, double>& pressure_by_event,
                                             const Roster* roster = nullptr,
                                             std::size_t min_attempts = kMinPassAttempts);

/// Scalar pressure on the passer at the start of every pass that lies inside
/// a possession of the passing team: amplified when an orientation is
/// known, vanilla otherwise.
std::map<std::string, double> pass_pressures(const MatchContext& ctx);

/// Vanilla pressure, orientation and outcome of the passer for every pass
/// inside a possession of the passing team whose passer orientation is known.
std::vector<AmplifierSample> pass_amplifier_samples(const MatchContext& ctx);

struct SeriesSample {
  std::int64_t frame_index = 0;  // window end
  double timestamp = 0.0;        // seconds
  double team_pressure = 0.0;
};

struct PressureSeries {
  int possession_id = 0;
  std::vector<SeriesSample> samples;
};

/// One sample per window of the possession, at the window end. Throws
/// ValidationError when the possession is shorter than one window.
PressureSeries team_pressure_series(const PopModel& model, const MatchContext& ctx, const Possession& possession,
                                    const WindowSpec& spec);

struct EventDelta {
  std::string event_id;
  EventKind kind = EventKind::pass;
  std::string player_id;
  double pressure_start = 0.0;
  double pressure_end = 0.0;
  /// Positive when pressure is relieved.
  double delta = 0.0;
};

struct DeltaResult {
  std::optional<EventDelta> delta;
  std::string reason;  // why the event was skipped
};

/// Team pressure of the windows ending at the event's start and end frames.
/// Skips (with a reason) events other than passes and dribbles and events
/// whose windows do not both fit inside one possession.
DeltaResult event_pressure_delta(const PopModel& model, const MatchContext& ctx, const Event& event);

struct PlayerDeltaRow {
  std::string player_id;
  EventKind kind = EventKind::pass;
  double mean_delta = 0.0;
  std::size_t count = 0;
};

/// Mean delta per (player, kind), highest mean first.
std::vector<PlayerDeltaRow> player_delta_summary(const std::vector<EventDelta>& deltas);

void write_pass_accuracy(std::ostream& out, const std::vector<PassAccuracyRow>& rows);
void write_pressure_series(std::ostream& out, const PressureSeries& series);
void write_event_deltas(std::ostream& out, const std::vector<EventDelta>& deltas);
void write_player_deltas(std::ostream& out, const std::vector<PlayerDeltaRow>& rows);

}  // namespace pressmap
