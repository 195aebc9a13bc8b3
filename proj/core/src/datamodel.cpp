#include "pressmap/datamodel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "pressmap/error.hpp"

namespace pressmap {

int attack_sign(std::string_view team) {
  if (team == kHomeTeam) return 1;
  if (team == kAwayTeam) return -1;
  throw ValidationError("unknown team '" + std::string(team) + "' (expected home or away)");
}

std::string opponent_of(std::string_view team) {
  if (team == kHomeTeam) return std::string(kAwayTeam);
  if (team == kAwayTeam) return std::string(kHomeTeam);
  throw ValidationError("unknown team '" + std::string(team) + "' (expected home or away)");
}

const PlayerState* Frame::find(std::string_view player_id) const {
  for (const auto& p : players) {
    if (p.player_id == player_id) return &p;
  }
  return nullptr;
}

std::optional<std::size_t> TrackingSequence::position_of(std::int64_t frame_index) const {
  if (frames.empty()) return std::nullopt;
  // Fast path for contiguous indices.
  const std::int64_t offset = frame_index - frames.front().frame_index;
  if (offset >= 0 && static_cast<std::size_t>(offset) < frames.size() &&
      frames[static_cast<std::size_t>(offset)].frame_index == frame_index) {
    return static_cast<std::size_t>(offset);
  }
  auto it = std::lower_bound(frames.begin(), frames.end(), frame_index,
                             [](const Frame& f, std::int64_t idx) { return f.frame_index < idx; });
  if (it == frames.end() || it->frame_index != frame_index) return std::nullopt;
  return static_cast<std::size_t>(it - frames.begin());
}

bool TrackingSequence::contiguous() const {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].frame_index != frames[i - 1].frame_index + 1) return false;
  }
  return true;
}

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 8> kEventKinds{{
    {EventKind::pass, "pass"},
    {EventKind::dribble, "dribble"},
    {EventKind::carry, "carry"},
    {EventKind::tackle, "tackle"},
    {EventKind::interception, "interception"},
    {EventKind::clearance, "clearance"},
    {EventKind::shot, "shot"},
    {EventKind::other, "other"},
}};

constexpr std::array<std::pair<OrientationSource, std::string_view>, 3> kSources{{
    {OrientationSource::annotated, "annotated"},
    {OrientationSource::pose_estimated, "pose-estimated"},
    {OrientationSource::velocity_fallback, "velocity-fallback"},
}};

}  // namespace

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kEventKinds) {
    if (k == kind) return name;
  }
  return "other";
}

std::optional<EventKind> parse_event_kind(std::string_view token) {
  for (const auto& [k, name] : kEventKinds) {
    if (name == token) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Outcome outcome) { return outcome == Outcome::success ? "success" : "failure"; }

std::optional<Outcome> parse_outcome(std::string_view token) {
  if (token == "success") return Outcome::success;
  if (token == "failure") return Outcome::failure;
  return std::nullopt;
}

std::string_view to_string(OrientationSource source) {
  for (const auto& [s, name] : kSources) {
    if (s == source) return name;
  }
  return "annotated";
}

std::optional<OrientationSource> parse_orientation_source(std::string_view token) {
  for (const auto& [s, name] : kSources) {
    if (name == token) return s;
  }
  return std::nullopt;
}

OrientationIndex::OrientationIndex(const std::vector<OrientationRecord>& records) {
  for (const auto& r : records) records_.insert_or_assign({r.frame_index, r.player_id}, r);
}

const OrientationRecord* OrientationIndex::find(std::int64_t frame_index, std::string_view player_id) const {
  auto it = records_.find({frame_index, std::string(player_id)});
  return it == records_.end() ? nullptr : &it->second;
}

namespace {

Vec2 clamp_speed(Vec2 v, double cap) {
  const double speed = norm(v);
  if (speed > cap && speed > 0.0) return v * (cap / speed);
  return v;
}

// Central or one-sided difference of a position track around frame i.
template <typename Lookup>
Vec2 difference(const TrackingSequence& seq, std::size_t i, Lookup&& position_at) {
  const auto here = position_at(i);
  std::optional<Vec2> prev = i > 0 ? position_at(i - 1) : std::nullopt;
  std::optional<Vec2> next = i + 1 < seq.frames.size() ? position_at(i + 1) : std::nullopt;
  if (prev && next) {
    const double dt = seq.frames[i + 1].timestamp - seq.frames[i - 1].timestamp;
    return (*next - *prev) * (1.0 / dt);
  }
  if (next && here) {
    const double dt = seq.frames[i + 1].timestamp - seq.frames[i].timestamp;
    return (*next - *here) * (1.0 / dt);
  }
  if (prev && here) {
    const double dt = seq.frames[i].timestamp - seq.frames[i - 1].timestamp;
    return (*here - *prev) * (1.0 / dt);
  }
  return {};
}

}  // namespace

TrackingSequence derive_velocities(TrackingSequence seq, double speed_cap) {
  // Per-frame player lookup so neighbour access is O(1).
  std::vector<std::unordered_map<std::string, std::size_t>> slots(seq.frames.size());
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto& players = seq.frames[i].players;
    for (std::size_t j = 0; j < players.size(); ++j) slots[i].emplace(players[j].player_id, j);
  }

  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    auto& frame = seq.frames[i];
    for (auto& player : frame.players) {
      if (player.velocity) continue;
      const std::string& id = player.player_id;
      auto position_at = [&](std::size_t k) -> std::optional<Vec2> {
        auto it = slots[k].find(id);
        if (it == slots[k].end()) return std::nullopt;
        return seq.frames[k].players[it->second].position;
      };
      player.velocity = clamp_speed(difference(seq, i, position_at), speed_cap);
    }
    if (frame.ball && !frame.ball->velocity) {
      auto position_at = [&](std::size_t k) -> std::optional<Vec2> {
        if (!seq.frames[k].ball) return std::nullopt;
        return seq.frames[k].ball->position;
      };
      // The ball travels faster than players; only players are speed-capped.
      frame.ball->velocity = difference(seq, i, position_at);
    }
  }
  return seq;
}

Frame mirrored(const Frame& frame, const PitchSpec& pitch) {
  Frame out = frame;
  auto flip = [&](Vec2 p) { return Vec2{pitch.length - p.x, pitch.width - p.y}; };
  for (auto& p : out.players) {
    p.position = flip(p.position);
    if (p.velocity) p.velocity = Vec2{-p.velocity->x, -p.velocity->y};
    if (p.orientation) p.orientation = wrap_angle(*p.orientation + std::numbers::pi);
  }
  if (out.ball) {
    out.ball->position = flip(out.ball->position);
    if (out.ball->velocity) out.ball->velocity = Vec2{-out.ball->velocity->x, -out.ball->velocity->y};
  }
  return out;
}

OrientationRecord mirrored(const OrientationRecord& record) {
  OrientationRecord out = record;
  out.theta = wrap_angle(record.theta + std::numbers::pi);
  return out;
}

void infer_ball_owners(TrackingSequence& seq, double radius) {
  for (auto& frame : seq.frames) {
    frame.ball_owner.reset();
    if (!frame.ball) continue;
    double best = radius;
    for (const auto& p : frame.players) {
      const double d = distance(p.position, frame.ball->position);
      if (d <= best) {
        best = d;
        frame.ball_owner = p.player_id;
      }
    }
  }
}

void resample(TrackingSequence& seq, std::vector<Event>& events, std::vector<OrientationRecord>& orientations,
              double rate_hz) {
  if (seq.frames.size() < 2 || std::abs(seq.frame_rate_hz - rate_hz) < 1e-3) return;
  const double t0 = seq.frames.front().timestamp;
  const double t1 = seq.frames.back().timestamp;
  const auto count = static_cast<std::size_t>(std::floor((t1 - t0) * rate_hz + 1e-9)) + 1;

  std::vector<Frame> out;
  out.reserve(count);
  // Original frame index -> new frame index, for remapping references.
  std::vector<std::pair<std::int64_t, std::int64_t>> picks;
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = t0 + static_cast<double>(k) / rate_hz;
    while (cursor + 1 < seq.frames.size() &&
           std::abs(seq.frames[cursor + 1].timestamp - t) < std::abs(seq.frames[cursor].timestamp - t)) {
      ++cursor;
    }
    Frame f = seq.frames[cursor];
    picks.emplace_back(f.frame_index, static_cast<std::int64_t>(k));
    f.frame_index = static_cast<std::int64_t>(k);
    f.timestamp = t;
    out.push_back(std::move(f));
  }

  // Nearest new frame for any original index, by timestamp.
  auto remap = [&](std::int64_t original) {
    auto pos = seq.position_of(original);
    double t = pos ? seq.frames[*pos].timestamp : t0;
    if (!pos) {
      // Interpolate the timestamp for indices not present in the sequence.
      auto it = std::lower_bound(seq.frames.begin(), seq.frames.end(), original,
                                 [](const Frame& f, std::int64_t idx) { return f.frame_index < idx; });
      t = it == seq.frames.end() ? t1 : it->timestamp;
    }
    auto k = static_cast<std::int64_t>(std::llround((t - t0) * rate_hz));
    return std::clamp<std::int64_t>(k, 0, static_cast<std::int64_t>(count) - 1);
  };
  for (auto& e : events) {
    e.start_frame = remap(e.start_frame);
    e.end_frame = std::max(e.start_frame, remap(e.end_frame));
  }
  std::multimap<std::int64_t, const OrientationRecord*> by_frame;
  for (const auto& r : orientations) by_frame.emplace(r.frame_index, &r);
  std::vector<OrientationRecord> kept;
  for (const auto& [original, k] : picks) {
    auto [lo, hi] = by_frame.equal_range(original);
    for (auto it = lo; it != hi; ++it) {
      OrientationRecord copy = *it->second;
      copy.frame_index = k;
      kept.push_back(copy);
    }
  }
  orientations = std::move(kept);
  seq.frames = std::move(out);
  seq.frame_rate_hz = rate_hz;
}

}  // namespace pressmap
