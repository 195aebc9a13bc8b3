#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pressmap/datamodel.hpp"
#include "pressmap/pitch_control.hpp"

namespace pressmap {

/// Radius of the pressure circle: a 1 m diameter around the player.
inline constexpr double kPressureRadius = 0.5;
inline constexpr int kDirections = 8;

enum class PressureVariant { vanilla, amplified };
std::string_view to_string(PressureVariant variant);

/// Defensive control sampled at 8 points on a circle around a player.
/// Component k lies in direction 2πk/8 from +x, counterclockwise.
struct PressureVector {
  std::array<double, kDirections> values{};
  double radius = kPressureRadius;
  PressureVariant variant = PressureVariant::vanilla;

  friend bool operator==(const PressureVector&, const PressureVector&) = default;
};

/// Mean-one multiplicative weights indexed by direction relative to the
/// body: 0 is straight ahead, counterclockwise, so 2 is left and 6 right.
struct PressureAmplifier {
  static constexpr double kMinWeight = 0.5;
  static constexpr double kMaxWeight = 2.0;

  std::array<double, kDirections> weights{1, 1, 1, 1, 1, 1, 1, 1};

  static PressureAmplifier identity() { return {}; }
  /// Front and front-right emphasis used when no estimate is available.
  static PressureAmplifier defaults();

  /// Throws ValidationError if a weight leaves [0.5, 2] or the mean is not 1.
  void validate() const;
};

/// Pressure at a point on `center` with the same sampling as for a player.
PressureVector sample_pressure_at(const Sides& sides, Vec2 center, const ControlParams& params,
                                  double radius = kPressureRadius);

/// Vanilla pressure vector of an attacking player. Throws ValidationError if
/// the player is absent or not on the attacking team.
PressureVector sample_pressure_circle(const Frame& frame, std::string_view attacking_team, std::string_view player_id,
                                      const ControlParams& params, double radius = kPressureRadius);

/// Nearest of the 8 directions to `theta`.
int orientation_bin(double theta);

/// out[k] = clip(weights[(k - r) mod 8] · v[k], 0, 1) with r the
/// orientation bin of theta.
PressureVector apply_amplifier(const PressureVector& vanilla, double theta, const PressureAmplifier& amp);

struct AmplifierSample {
  PressureVector vanilla;
  double theta = 0.0;
  Outcome outcome = Outcome::success;
};

inline constexpr std::size_t kMinAmplifierSamples = 50;

/// Ratio of mean failure to mean success pressure per body-relative
/// direction, clamped to [0.5, 2] and normalized to mean one.
PressureAmplifier estimate_amplifier(std::span<const AmplifierSample> samples,
                                     std::size_t min_samples = kMinAmplifierSamples);

/// Mean of the 8 components.
double scalar_pressure(const PressureVector& v);

enum class PressureLevel : int { low = 1, medium = 2, high = 3 };

/// Level 1 up to 1/3 inclusive, level 2 up to 2/3 inclusive, level 3 above.
PressureLevel pressure_level(double s);

struct OrientationEstimate {
  double theta = 0.0;
  OrientationSource source = OrientationSource::annotated;
};

/// Speed below which velocity direction is not trusted as orientation.
inline constexpr double kMinFallbackSpeed = 0.5;

/// Body orientation of a player: an ingested record if present, else the
/// velocity direction when fast enough, else nothing (identity amplifier).
std::optional<OrientationEstimate> orientation_for(const Frame& frame, std::string_view player_id,
                                                   const OrientationIndex& orientations,
                                                   double min_speed = kMinFallbackSpeed);

PressureAmplifier parse_amplifier(std::istream& in);
void write_amplifier(std::ostream& out, const PressureAmplifier& amp);

struct PressureRow {
  std::int64_t frame_index = 0;
  std::string player_id;
  PressureVector pressure;
};

/// CSV `frame,player_id,k0..k7,scalar,level,variant`.
void write_pressure_dump(std::ostream& out, const std::vector<PressureRow>& rows);

}  // namespace pressmap
