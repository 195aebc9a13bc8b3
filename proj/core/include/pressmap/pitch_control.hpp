#pragma once

#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

#include "pressmap/datamodel.hpp"
#include "pressmap/geometry.hpp"

namespace pressmap {

/// Constants of the arrival-time pitch-control model.
struct ControlParams {
  double reaction_time = 0.7;   // s
  double max_speed = 7.8;       // m/s
  double logistic_scale = 0.45; // s

  /// Throws ValidationError unless every constant is strictly positive.
  void validate() const;
};

/// Kinematic state needed for arrival times.
struct Mover {
  Vec2 position;
  Vec2 velocity;
};

/// Players of one frame split by side relative to the attacking team.
struct Sides {
  std::vector<Mover> attackers;
  std::vector<Mover> defenders;
};

/// Every player whose team is not `attacking_team` defends. Absent
/// velocities count as zero.
Sides split_sides(const Frame& frame, std::string_view attacking_team);

/// Time for a player to reach q: reaction drift along the current velocity,
/// then a straight run at max_speed.
double arrival_time(const Mover& player, Vec2 q, const ControlParams& params);
double arrival_time(const PlayerState& player, Vec2 q, const ControlParams& params);

/// Logistic function evaluated without overflow for large |x|.
double logistic(double x);

/// Probability that the defending side controls a ball at q:
/// logistic((t_att - t_def) / τ) over each side's fastest arrival.
/// No defenders gives 0, no attackers gives 1; both empty throws.
double defensive_control(const Sides& sides, Vec2 q, const ControlParams& params);
double defensive_control(const Frame& frame, std::string_view attacking_team, Vec2 q, const ControlParams& params);

struct ControlGrid {
  PitchSpec pitch;
  double cell_size = 1.0;
  int columns = 0;  // m, along x
  int rows = 0;     // n, along y
  std::int64_t frame_index = 0;
  std::vector<double> values;  // values[n * columns + m]

  /// Centre of cell (m, n): ((m + 0.5)·cell, (n + 0.5)·cell).
  Vec2 cell_center(int m, int n) const;
  double at(int m, int n) const { return values[static_cast<std::size_t>(n) * columns + m]; }
};

/// Evaluates defensive_control at every cell centre covering the pitch.
ControlGrid control_grid(const Frame& frame, std::string_view attacking_team, const PitchSpec& pitch,
                         double cell_size, const ControlParams& params);

/// CSV matrix: one line per row n (y), one column per m (x).
void write_control_grid(std::ostream& out, const ControlGrid& grid);

}  // namespace pressmap
