#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pressmap/datamodel.hpp"
#include "pressmap/pressure.hpp"

namespace pressmap {

inline constexpr int kPpmAttackers = 11;
inline constexpr int kPpmNodes = 12;
inline constexpr int kNodeFeatures = 14;
inline constexpr int kEdgeFeatures = 3;
inline constexpr int kDirectedEdges = kPpmNodes * (kPpmNodes - 1);
inline constexpr int kFramesPerWindow = 50;

/// tracking: no pressure; ppm2d: vanilla pressure; ppm3d: orientation-amplified pressure.
enum class PpmVariant { tracking, ppm2d, ppm3d };
std::string_view to_string(PpmVariant variant);
std::optional<PpmVariant> parse_ppm_variant(std::string_view token);

/// Node features: x/L, y/W, vx/v_cap, vy/v_cap, is_ball, has_ball, p0..p7.
using NodeFeatures = std::array<double, kNodeFeatures>;
/// Edge features: distance/pitch diagonal, cos(angle), sin(angle).
using EdgeFeatures = std::array<double, kEdgeFeatures>;

/// Complete graph over the 11 attackers (sorted by id) and the ball (last).
/// Edges are directed and stored in (u, v) lexicographic order, u != v.
struct PpmGraph {
  std::int64_t frame_index = 0;
  PpmVariant variant = PpmVariant::tracking;
  std::array<std::string, kPpmNodes> node_ids;
  std::array<NodeFeatures, kPpmNodes> nodes{};
  std::array<EdgeFeatures, kDirectedEdges> edges{};

  /// Slot of directed edge u -> v in `edges`.
  static constexpr int edge_slot(int u, int v) { return u * (kPpmNodes - 1) + (v < u ? v : v - 1); }

  friend bool operator==(const PpmGraph&, const PpmGraph&) = default;
};

/// Pressure vectors keyed by player id; the ball uses kBallId.
using PressureMap = std::map<std::string, PressureVector, std::less<>>;

/// Builds the PPM of a frame already oriented so `attacking_team` attacks +x.
/// Throws ValidationError on a wrong attacker count, a missing ball, or a
/// missing pressure vector (non-tracking variants).
PpmGraph build_ppm(const Frame& frame, std::string_view attacking_team, const PressureMap& pressures,
                   PpmVariant variant, const PitchSpec& pitch = {});

struct PpmSequence {
  std::vector<PpmGraph> graphs;
  std::optional<int> label;  // 0 = possession lost, 1 = kept
  std::string match_id;
  int possession_id = 0;
  std::int64_t window_start_frame = 0;
};

/// One graph per frame over exactly 50 consecutive frames of one possession.
PpmSequence build_sequence(std::span<const Frame> frames, const Possession& possession,
                           std::span<const PressureMap> pressures, PpmVariant variant, const PitchSpec& pitch = {});

/// One line: frame_index, variant, 12 x 14 node features, 132 x 3 edge features.
void write_ppm_line(std::ostream& out, const PpmGraph& graph);
/// Node ids are not part of the dump and come back empty.
PpmGraph parse_ppm_line(std::string_view line);

}  // namespace pressmap
