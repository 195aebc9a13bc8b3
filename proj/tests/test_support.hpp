#pragma once

#include <string>

#include "pressmap/datamodel.hpp"
#include "pressmap/ppm_graph.hpp"
#include "pressmap/pressure.hpp"
#include "pressmap/rng.hpp"

namespace pressmap::testing {

/// 11 home and 11 away players at random positions with random velocities,
/// plus a ball next to home player h1.
inline Frame random_frame(Rng& rng, const PitchSpec& pitch = {}) {
  Frame f;
  for (const char* team : {"home", "away"}) {
    for (int i = 1; i <= 11; ++i) {
      PlayerState p;
      p.player_id = std::string(team[0] == 'h' ? "h" : "a") + std::to_string(i);
      p.team = team;
      p.position = {rng.uniform(0.0, pitch.length), rng.uniform(0.0, pitch.width)};
      p.velocity = Vec2{rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0)};
      f.players.push_back(p);
    }
  }
  const Vec2 c = f.players[0].position;
  f.ball = BallState{{c.x + 0.3, c.y}, std::nullopt};
  f.ball_owner = "h1";
  return f;
}

/// Same frame with every player's team label exchanged.
inline Frame swap_teams(Frame f) {
  for (auto& p : f.players) p.team = p.team == "home" ? "away" : "home";
  return f;
}

/// Vanilla pressure of every home player and the ball.
inline PressureMap home_pressures(const Frame& f, const ControlParams& params = {}) {
  PressureMap m;
  for (const auto& p : f.players) {
    if (p.team == "home") m[p.player_id] = sample_pressure_circle(f, "home", p.player_id, params);
  }
  m[std::string(kBallId)] = sample_pressure_at(split_sides(f, "home"), f.ball->position, params);
  return m;
}

}  // namespace pressmap::testing
