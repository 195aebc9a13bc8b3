#include "pressmap/ppm_graph.hpp"

#include <algorithm>
#include <cmath>

#include "pressmap/error.hpp"
#include "pressmap/text.hpp"

namespace pressmap {

std::string_view to_string(PpmVariant variant) {
  switch (variant) {
    case PpmVariant::tracking: return "tracking";
    case PpmVariant::ppm2d: return "ppm2d";
    case PpmVariant::ppm3d: return "ppm3d";
  }
  return "tracking";
}

std::optional<PpmVariant> parse_ppm_variant(std::string_view token) {
  if (token == "tracking") return PpmVariant::tracking;
  if (token == "ppm2d") return PpmVariant::ppm2d;
  if (token == "ppm3d") return PpmVariant::ppm3d;
  return std::nullopt;
}

namespace {

NodeFeatures node_features(Vec2 position, Vec2 velocity, bool is_ball, bool has_ball, const PressureVector* pressure,
                           const PitchSpec& pitch) {
  NodeFeatures f{};
  f[0] = position.x / pitch.length;
  f[1] = position.y / pitch.width;
  f[2] = velocity.x / kSpeedCap;
  f[3] = velocity.y / kSpeedCap;
  f[4] = is_ball ? 1.0 : 0.0;
  f[5] = has_ball ? 1.0 : 0.0;
  if (pressure) std::copy(pressure->values.begin(), pressure->values.end(), f.begin() + 6);
  return f;
}

}  // namespace

PpmGraph build_ppm(const Frame& frame, std::string_view attacking_team, const PressureMap& pressures,
                   PpmVariant variant, const PitchSpec& pitch) {
  std::vector<const PlayerState*> attackers;
  for (const auto& p : frame.players) {
    if (p.team == attacking_team) attackers.push_back(&p);
  }
  if (attackers.size() != kPpmAttackers) {
    throw ValidationError("frame " + std::to_string(frame.frame_index) + ": expected 11 attacking players, found " +
                          std::to_string(attackers.size()));
  }
  if (!frame.ball) throw ValidationError("frame " + std::to_string(frame.frame_index) + ": ball missing");
  std::sort(attackers.begin(), attackers.end(),
            [](const PlayerState* a, const PlayerState* b) { return a->player_id < b->player_id; });

  const bool with_pressure = variant != PpmVariant::tracking;
  const PressureVector* const kNone = nullptr;
  auto pressure_of = [&](std::string_view id) -> const PressureVector* {
    if (!with_pressure) return kNone;
    auto it = pressures.find(id);
    if (it == pressures.end()) {
      throw ValidationError("frame " + std::to_string(frame.frame_index) + ": no pressure vector for " +
                            std::string(id));
    }
    return &it->second;
  };

  PpmGraph g;
  g.frame_index = frame.frame_index;
  g.variant = variant;
  std::array<Vec2, kPpmNodes> positions;
  const bool owner_attacking =
      frame.ball_owner && std::any_of(attackers.begin(), attackers.end(),
                                      [&](const PlayerState* p) { return p->player_id == *frame.ball_owner; });
  for (int i = 0; i < kPpmAttackers; ++i) {
    const PlayerState& p = *attackers[i];
    g.node_ids[i] = p.player_id;
    positions[i] = p.position;
    const bool has_ball = owner_attacking && p.player_id == *frame.ball_owner;
    g.nodes[i] = node_features(p.position, p.velocity.value_or(Vec2{}), false, has_ball, pressure_of(p.player_id), pitch);
  }
  const int ball = kPpmNodes - 1;
  g.node_ids[ball] = std::string(kBallId);
  positions[ball] = frame.ball->position;
  g.nodes[ball] = node_features(frame.ball->position, frame.ball->velocity.value_or(Vec2{}), true, false,
                                pressure_of(kBallId), pitch);

  const double diag = pitch.diagonal();
  for (int u = 0; u < kPpmNodes; ++u) {
    for (int v = u + 1; v < kPpmNodes; ++v) {
      const Vec2 d = positions[v] - positions[u];
      const double dist = norm(d);
      const double angle = std::atan2(d.y, d.x);
      const double c = std::cos(angle), s = std::sin(angle);
      g.edges[PpmGraph::edge_slot(u, v)] = {dist / diag, c, s};
      g.edges[PpmGraph::edge_slot(v, u)] = {dist / diag, -c, -s};
    }
  }
  return g;
}

PpmSequence build_sequence(std::span<const Frame> frames, const Possession& possession,
                           std::span<const PressureMap> pressures, PpmVariant variant, const PitchSpec& pitch) {
  if (frames.size() != kFramesPerWindow) {
    throw ValidationError("expected 50 frames, got " + std::to_string(frames.size()));
  }
  if (variant != PpmVariant::tracking && pressures.size() != frames.size()) {
    throw ValidationError("expected one pressure map per frame");
  }
  PpmSequence seq;
  seq.possession_id = possession.id;
  seq.window_start_frame = frames.front().frame_index;
  seq.graphs.reserve(frames.size());
  static const PressureMap kEmpty;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    if (!possession.contains(f.frame_index)) {
      throw ValidationError("frame " + std::to_string(f.frame_index) + " crosses the boundary of possession " +
                            std::to_string(possession.id));
    }
    if (i > 0 && f.frame_index != frames[i - 1].frame_index + 1) {
      throw ValidationError("frames are not consecutive at frame " + std::to_string(f.frame_index));
    }
    const PressureMap& p = pressures.empty() ? kEmpty : pressures[i];
    seq.graphs.push_back(build_ppm(f, possession.team, p, variant, pitch));
  }
  return seq;
}

void write_ppm_line(std::ostream& out, const PpmGraph& graph) {
  out << graph.frame_index << ',' << to_string(graph.variant);
  for (const auto& n : graph.nodes) {
    for (double v : n) out << ',' << text::format_double(v);
  }
  for (const auto& e : graph.edges) {
    for (double v : e) out << ',' << text::format_double(v);
  }
  out << '\n';
}

PpmGraph parse_ppm_line(std::string_view line) {
  const auto fields = text::split(line);
  constexpr std::size_t expected = 2 + kPpmNodes * kNodeFeatures + kDirectedEdges * kEdgeFeatures;
  if (fields.size() != expected) {
    throw ValidationError("PPM record has " + std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(expected));
  }
  PpmGraph g;
  auto idx = text::parse_int(fields[0]);
  auto variant = parse_ppm_variant(fields[1]);
  if (!idx || !variant) throw ValidationError("malformed PPM record header");
  g.frame_index = *idx;
  g.variant = *variant;
  std::size_t k = 2;
  auto next = [&] {
    auto v = text::parse_double(fields[k++]);
    if (!v) throw ValidationError("malformed PPM feature value");
    return *v;
  };
  for (auto& n : g.nodes) {
    for (double& v : n) v = next();
  }
  for (auto& e : g.edges) {
    for (double& v : e) v = next();
  }
  return g;
}

}  // namespace pressmap
