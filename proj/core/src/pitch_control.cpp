#include "pressmap/pitch_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pressmap/error.hpp"
#include "pressmap/text.hpp"

namespace pressmap {

void ControlParams::validate() const {
  if (!(reaction_time > 0.0) || !(max_speed > 0.0) || !(logistic_scale > 0.0)) {
    throw ValidationError("control parameters must be strictly positive");
  }
}

Sides split_sides(const Frame& frame, std::string_view attacking_team) {
  Sides sides;
  for (const auto& p : frame.players) {
    Mover m{p.position, p.velocity.value_or(Vec2{})};
    if (p.team == attacking_team) sides.attackers.push_back(m);
    else sides.defenders.push_back(m);
  }
  return sides;
}

double arrival_time(const Mover& player, Vec2 q, const ControlParams& params) {
  const Vec2 drifted = player.position + player.velocity * params.reaction_time;
  return params.reaction_time + distance(drifted, q) / params.max_speed;
}

double arrival_time(const PlayerState& player, Vec2 q, const ControlParams& params) {
  return arrival_time(Mover{player.position, player.velocity.value_or(Vec2{})}, q, params);
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

double fastest(const std::vector<Mover>& side, Vec2 q, const ControlParams& params) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : side) best = std::min(best, arrival_time(m, q, params));
  return best;
}

}  // namespace

double defensive_control(const Sides& sides, Vec2 q, const ControlParams& params) {
  if (sides.attackers.empty() && sides.defenders.empty()) {
    throw ValidationError("defensive_control: frame has no players on either team");
  }
  if (sides.defenders.empty()) return 0.0;
  if (sides.attackers.empty()) return 1.0;
  const double t_att = fastest(sides.attackers, q, params);
  const double t_def = fastest(sides.defenders, q, params);
  return logistic((t_att - t_def) / params.logistic_scale);
}

double defensive_control(const Frame& frame, std::string_view attacking_team, Vec2 q, const ControlParams& params) {
  return defensive_control(split_sides(frame, attacking_team), q, params);
}

Vec2 ControlGrid::cell_center(int m, int n) const {
  return {(m + 0.5) * cell_size, (n + 0.5) * cell_size};
}

ControlGrid control_grid(const Frame& frame, std::string_view attacking_team, const PitchSpec& pitch,
                         double cell_size, const ControlParams& params) {
  if (!(cell_size > 0.0)) throw ValidationError("cell_size must be positive");
  ControlGrid grid;
  grid.pitch = pitch;
  grid.cell_size = cell_size;
  grid.frame_index = frame.frame_index;
  grid.columns = static_cast<int>(std::ceil(pitch.length / cell_size - 1e-9));
  grid.rows = static_cast<int>(std::ceil(pitch.width / cell_size - 1e-9));
  grid.values.resize(static_cast<std::size_t>(grid.columns) * grid.rows);
  const Sides sides = split_sides(frame, attacking_team);
  for (int n = 0; n < grid.rows; ++n) {
    for (int m = 0; m < grid.columns; ++m) {
      grid.values[static_cast<std::size_t>(n) * grid.columns + m] =
          defensive_control(sides, grid.cell_center(m, n), params);
    }
  }
  return grid;
}

void write_control_grid(std::ostream& out, const ControlGrid& grid) {
  for (int n = 0; n < grid.rows; ++n) {
    for (int m = 0; m < grid.columns; ++m) {
      if (m) out << ',';
      out << text::format_double(grid.at(m, n));
    }
    out << '\n';
  }
}

}  // namespace pressmap
