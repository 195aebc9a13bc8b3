#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pressmap/geometry.hpp"

namespace pressmap {

inline constexpr std::string_view kHomeTeam = "home";
inline constexpr std::string_view kAwayTeam = "away";
inline constexpr std::string_view kBallTeam = "none";
inline constexpr std::string_view kBallId = "ball";

/// Positions may exceed the pitch by this much before validation rejects them.
inline constexpr double kPitchMargin = 5.0;
/// Derived speeds are clamped to this value (m/s).
inline constexpr double kSpeedCap = 12.0;
inline constexpr double kNominalFrameRate = 25.0;

/// Home attacks toward +x, away toward -x. Throws ValidationError otherwise.
int attack_sign(std::string_view team);
std::string opponent_of(std::string_view team);

struct PlayerState {
  std::string player_id;
  std::string team;
  Vec2 position;
  std::optional<Vec2> velocity;
  /// Body-facing direction in [0, 2π) from +x, when known.
  std::optional<double> orientation;

  friend bool operator==(const PlayerState&, const PlayerState&) = default;
};

struct BallState {
  Vec2 position;
  std::optional<Vec2> velocity;

  friend bool operator==(const BallState&, const BallState&) = default;
};

struct Frame {
  std::int64_t frame_index = 0;
  double timestamp = 0.0;
  std::vector<PlayerState> players;
  std::optional<BallState> ball;
  std::optional<std::string> ball_owner;

  const PlayerState* find(std::string_view player_id) const;
  friend bool operator==(const Frame&, const Frame&) = default;
};

struct TrackingSequence {
  std::vector<Frame> frames;
  PitchSpec pitch;
  double frame_rate_hz = kNominalFrameRate;

  /// Index into `frames` of the frame carrying `frame_index`.
  std::optional<std::size_t> position_of(std::int64_t frame_index) const;
  /// True when frame indices increase by exactly one.
  bool contiguous() const;

  friend bool operator==(const TrackingSequence&, const TrackingSequence&) = default;
};

enum class EventKind { pass, dribble, carry, tackle, interception, clearance, shot, other };
enum class Outcome { success, failure };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view token);
std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view token);

struct Event {
  std::string event_id;
  EventKind kind = EventKind::other;
  std::string team;
  std::string player_id;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  Outcome outcome = Outcome::success;
  Vec2 start_location;
  Vec2 end_location;

  /// Events of kind `other` mark stoppages; everything else touches the ball.
  bool on_ball() const { return kind != EventKind::other; }
  friend bool operator==(const Event&, const Event&) = default;
};

enum class PossessionEnd { turnover, stoppage, end_of_data };

struct Possession {
  int id = 0;
  std::string team;
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;
  double duration = 0.0;
  PossessionEnd end_reason = PossessionEnd::end_of_data;

  bool contains(std::int64_t frame) const { return frame >= start_frame && frame <= end_frame; }
};

enum class OrientationSource { annotated, pose_estimated, velocity_fallback };

std::string_view to_string(OrientationSource source);
std::optional<OrientationSource> parse_orientation_source(std::string_view token);

struct OrientationRecord {
  std::int64_t frame_index = 0;
  std::string player_id;
  double theta = 0.0;
  OrientationSource source = OrientationSource::annotated;

  friend bool operator==(const OrientationRecord&, const OrientationRecord&) = default;
};

/// Lookup of orientation records by (frame, player).
class OrientationIndex {
 public:
  OrientationIndex() = default;
  explicit OrientationIndex(const std::vector<OrientationRecord>& records);

  const OrientationRecord* find(std::int64_t frame_index, std::string_view player_id) const;
  std::size_t size() const { return records_.size(); }

 private:
  std::map<std::pair<std::int64_t, std::string>, OrientationRecord> records_;
};

/// Fills absent velocities by central differences (one-sided at the ends,
/// zero when a player has no neighbouring sample) and clamps derived speeds
/// to `speed_cap`. Velocities already present are kept.
TrackingSequence derive_velocities(TrackingSequence seq, double speed_cap = kSpeedCap);

/// Rotates the frame by π about the pitch centre so that a team attacking
/// toward -x appears to attack toward +x.
Frame mirrored(const Frame& frame, const PitchSpec& pitch);
OrientationRecord mirrored(const OrientationRecord& record);

/// Marks the nearest player within `radius` of the ball as its owner.
void infer_ball_owners(TrackingSequence& seq, double radius = 1.0);

/// Resamples to `rate_hz` by nearest-timestamp selection and remaps the
/// frame references of events and orientation records onto the new frames.
/// No-op when the sequence already runs at that rate.
void resample(TrackingSequence& seq, std::vector<Event>& events,
              std::vector<OrientationRecord>& orientations, double rate_hz = kNominalFrameRate);

/// Everything known about one match.
struct MatchData {
  std::string match_id;
  TrackingSequence tracking;
  std::vector<Event> events;
  std::vector<OrientationRecord> orientations;
};

}  // namespace pressmap
