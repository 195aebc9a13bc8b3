#include "pressmap/tracking_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pressmap/error.hpp"
#include "pressmap/text.hpp"

namespace pressmap {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw ValidationError("line " + std::to_string(line_no) + ": " + what);
}

void expect_header(std::istream& in, std::string_view header, std::size_t& line_no) {
  std::string line;
  if (!text::read_line(in, line)) throw ValidationError("missing header row (expected '" + std::string(header) + "')");
  ++line_no;
  if (text::trim(line) != header) {
    fail(line_no, "unexpected header '" + line + "' (expected '" + std::string(header) + "')");
  }
}

std::vector<std::string_view> fields_of(const std::string& line, std::size_t expected, std::size_t line_no) {
  auto fields = text::split(line);
  if (fields.size() != expected) {
    fail(line_no, "expected " + std::to_string(expected) + " fields, found " + std::to_string(fields.size()));
  }
  for (auto& f : fields) f = text::trim(f);
  return fields;
}

double number(std::string_view field, const char* name, std::size_t line_no) {
  auto v = text::parse_double(field);
  if (!v || !std::isfinite(*v)) fail(line_no, std::string("malformed ") + name + " '" + std::string(field) + "'");
  return *v;
}

std::int64_t integer(std::string_view field, const char* name, std::size_t line_no) {
  auto v = text::parse_int(field);
  if (!v) fail(line_no, std::string("malformed ") + name + " '" + std::string(field) + "'");
  return *v;
}

std::string accepted_kinds() {
  std::string out;
  for (auto k : {EventKind::pass, EventKind::dribble, EventKind::carry, EventKind::tackle, EventKind::interception,
                 EventKind::clearance, EventKind::shot, EventKind::other}) {
    if (!out.empty()) out += ", ";
    out += to_string(k);
  }
  return out;
}

std::string fmt(double v) { return text::format_double(v); }

}  // namespace

TrackingSequence parse_tracking(std::istream& in, const PitchSpec& pitch) {
  TrackingSequence seq;
  seq.pitch = pitch;
  std::size_t line_no = 0;
  expect_header(in, kTrackingHeader, line_no);

  std::set<std::string> seen_in_frame;
  std::set<std::int64_t> closed_frames;
  std::string line;
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = fields_of(line, 8, line_no);

    const std::int64_t frame_index = integer(f[0], "frame", line_no);
    if (frame_index < 0) fail(line_no, "negative frame index");
    const double timestamp = number(f[1], "timestamp", line_no);
    const std::string team(f[2]);
    const std::string player_id(f[3]);
    if (player_id.empty()) fail(line_no, "empty player_id");
    const Vec2 position{number(f[4], "x", line_no), number(f[5], "y", line_no)};

    std::optional<Vec2> velocity;
    if (!f[6].empty() || !f[7].empty()) {
      if (f[6].empty() || f[7].empty()) fail(line_no, "vx and vy must both be present or both be empty");
      velocity = Vec2{number(f[6], "vx", line_no), number(f[7], "vy", line_no)};
    }

    if (position.x < -kPitchMargin || position.x > pitch.length + kPitchMargin || position.y < -kPitchMargin ||
        position.y > pitch.width + kPitchMargin) {
      fail(line_no, "position (" + fmt(position.x) + ", " + fmt(position.y) + ") outside the " + fmt(pitch.length) +
                        " x " + fmt(pitch.width) + " pitch");
    }

    if (seq.frames.empty() || seq.frames.back().frame_index != frame_index) {
      if (closed_frames.count(frame_index)) fail(line_no, "rows of frame " + std::to_string(frame_index) + " are not adjacent");
      if (!seq.frames.empty()) {
        const Frame& prev = seq.frames.back();
        if (frame_index < prev.frame_index) fail(line_no, "frame index decreases");
        if (!(timestamp > prev.timestamp)) fail(line_no, "non-monotonic timestamp " + fmt(timestamp));
        closed_frames.insert(prev.frame_index);
      }
      Frame frame;
      frame.frame_index = frame_index;
      frame.timestamp = timestamp;
      seq.frames.push_back(std::move(frame));
      seen_in_frame.clear();
    } else if (seq.frames.back().timestamp != timestamp) {
      fail(line_no, "timestamp differs from earlier rows of frame " + std::to_string(frame_index));
    }
    Frame& frame = seq.frames.back();

    if (!seen_in_frame.insert(player_id).second) {
      fail(line_no, "duplicate (frame, player) pair (" + std::to_string(frame_index) + ", " + player_id + ")");
    }

    if (player_id == kBallId) {
      if (team != kBallTeam) fail(line_no, "ball row must use team 'none'");
      frame.ball = BallState{position, velocity};
    } else {
      if (team != kHomeTeam && team != kAwayTeam) fail(line_no, "unknown team '" + team + "'");
      frame.players.push_back(PlayerState{player_id, team, position, velocity, std::nullopt});
    }
  }

  if (seq.frames.size() >= 2) {
    const double span = seq.frames.back().timestamp - seq.frames.front().timestamp;
    seq.frame_rate_hz = static_cast<double>(seq.frames.size() - 1) / span;
    // Snap to the nominal rate when within timestamp rounding.
    if (std::abs(seq.frame_rate_hz - kNominalFrameRate) < 1e-6 * kNominalFrameRate) seq.frame_rate_hz = kNominalFrameRate;
  }
  return seq;
}

void write_tracking(std::ostream& out, const TrackingSequence& seq) {
  out << kTrackingHeader << '\n';
  auto row = [&](const Frame& f, std::string_view team, std::string_view id, Vec2 p, const std::optional<Vec2>& v) {
    out << f.frame_index << ',' << fmt(f.timestamp) << ',' << team << ',' << id << ',' << fmt(p.x) << ','
        << fmt(p.y) << ',';
    if (v) out << fmt(v->x) << ',' << fmt(v->y);
    else out << ',';
    out << '\n';
  };
  for (const auto& f : seq.frames) {
    for (const auto& p : f.players) row(f, p.team, p.player_id, p.position, p.velocity);
    if (f.ball) row(f, kBallTeam, kBallId, f.ball->position, f.ball->velocity);
  }
}

std::vector<Event> parse_events(std::istream& in) {
  std::vector<Event> events;
  std::size_t line_no = 0;
  expect_header(in, kEventsHeader, line_no);
  std::string line;
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = fields_of(line, 11, line_no);
    Event e;
    e.event_id = std::string(f[0]);
    auto kind = parse_event_kind(f[1]);
    if (!kind) fail(line_no, "unknown event kind '" + std::string(f[1]) + "' (accepted: " + accepted_kinds() + ")");
    e.kind = *kind;
    e.team = std::string(f[2]);
    e.player_id = std::string(f[3]);
    e.start_frame = integer(f[4], "start_frame", line_no);
    e.end_frame = integer(f[5], "end_frame", line_no);
    if (e.start_frame > e.end_frame) fail(line_no, "start_frame after end_frame");
    auto outcome = parse_outcome(f[6]);
    if (!outcome) fail(line_no, "unknown outcome '" + std::string(f[6]) + "' (accepted: success, failure)");
    e.outcome = *outcome;
    e.start_location = {number(f[7], "start_x", line_no), number(f[8], "start_y", line_no)};
    e.end_location = {number(f[9], "end_x", line_no), number(f[10], "end_y", line_no)};
    events.push_back(std::move(e));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.start_frame < b.start_frame; });
  return events;
}

void write_events(std::ostream& out, const std::vector<Event>& events) {
  out << kEventsHeader << '\n';
  for (const auto& e : events) {
    out << e.event_id << ',' << to_string(e.kind) << ',' << e.team << ',' << e.player_id << ',' << e.start_frame
        << ',' << e.end_frame << ',' << to_string(e.outcome) << ',' << fmt(e.start_location.x) << ','
        << fmt(e.start_location.y) << ',' << fmt(e.end_location.x) << ',' << fmt(e.end_location.y) << '\n';
  }
}

std::vector<std::string> check_event_frames(const std::vector<Event>& events, const TrackingSequence& seq) {
  std::vector<std::string> issues;
  if (seq.frames.empty()) return issues;
  const auto first = seq.frames.front().frame_index;
  const auto last = seq.frames.back().frame_index;
  for (const auto& e : events) {
    if (e.start_frame < first || e.end_frame > last) {
      issues.push_back("event " + e.event_id + " references frames " + std::to_string(e.start_frame) + "-" +
                       std::to_string(e.end_frame) + " outside tracking range " + std::to_string(first) + "-" +
                       std::to_string(last));
    }
  }
  return issues;
}

std::vector<OrientationRecord> parse_orientations(std::istream& in, const TrackingSequence* known) {
  std::vector<OrientationRecord> records;
  std::set<std::string> players;
  if (known) {
    for (const auto& f : known->frames) {
      for (const auto& p : f.players) players.insert(p.player_id);
    }
  }
  std::size_t line_no = 0;
  std::string line;
  // An empty file is an empty record list.
  if (!text::read_line(in, line)) return records;
  ++line_no;
  if (text::trim(line) != kOrientationsHeader) {
    fail(line_no, "unexpected header '" + line + "' (expected '" + std::string(kOrientationsHeader) + "')");
  }
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = fields_of(line, 4, line_no);
    OrientationRecord r;
    r.frame_index = integer(f[0], "frame", line_no);
    r.player_id = std::string(f[1]);
    auto theta = text::parse_double(f[2]);
    if (!theta || !std::isfinite(*theta)) fail(line_no, "theta is not finite: '" + std::string(f[2]) + "'");
    r.theta = wrap_angle(*theta);
    auto source = parse_orientation_source(f[3]);
    if (!source) {
      fail(line_no, "unknown source '" + std::string(f[3]) + "' (accepted: annotated, pose-estimated, velocity-fallback)");
    }
    r.source = *source;
    if (known && !players.count(r.player_id)) fail(line_no, "unknown player '" + r.player_id + "'");
    records.push_back(std::move(r));
  }
  return records;
}

void write_orientations(std::ostream& out, const std::vector<OrientationRecord>& records) {
  out << kOrientationsHeader << '\n';
  for (const auto& r : records) {
    out << r.frame_index << ',' << r.player_id << ',' << fmt(r.theta) << ',' << to_string(r.source) << '\n';
  }
}

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

template <typename Fn>
auto with_file_context(const std::filesystem::path& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(path.filename().string() + " " + e.what());
  }
}

}  // namespace

MatchData load_match(const std::filesystem::path& dir, const PitchSpec& pitch) {
  MatchData match;
  match.match_id = dir.filename().string();
  if (match.match_id.empty()) match.match_id = dir.parent_path().filename().string();

  const auto tracking_path = dir / kTrackingFile;
  auto tracking_in = open_or_throw(tracking_path);
  match.tracking = with_file_context(tracking_path, [&] { return parse_tracking(tracking_in, pitch); });

  const auto events_path = dir / kEventsFile;
  auto events_in = open_or_throw(events_path);
  match.events = with_file_context(events_path, [&] { return parse_events(events_in); });

  const auto orientations_path = dir / kOrientationsFile;
  if (std::filesystem::exists(orientations_path)) {
    auto orient_in = open_or_throw(orientations_path);
    match.orientations =
        with_file_context(orientations_path, [&] { return parse_orientations(orient_in, &match.tracking); });
  }
  return match;
}

std::vector<MatchData> load_matches(const std::filesystem::path& dir, const PitchSpec& pitch) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("data directory not found: " + dir.string());
  if (std::filesystem::exists(dir / kTrackingFile)) return {load_match(dir, pitch)};
  std::vector<std::filesystem::path> subdirs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / kTrackingFile)) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  if (subdirs.empty()) throw ValidationError("no match data (tracking.csv) under " + dir.string());
  std::vector<MatchData> matches;
  for (const auto& d : subdirs) matches.push_back(load_match(d, pitch));
  return matches;
}

}  // namespace pressmap
