#include "pressmap/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pressmap/error.hpp"
#include "pressmap/text.hpp"

namespace pressmap {

std::string_view to_string(PressureVariant variant) {
  return variant == PressureVariant::vanilla ? "vanilla" : "amplified";
}

namespace {

double mean_of(const std::array<double, kDirections>& a) {
  return std::accumulate(a.begin(), a.end(), 0.0) / kDirections;
}

}  // namespace

PressureAmplifier PressureAmplifier::defaults() {
  // Front 1.30, front-right 1.15, right 1.20, back 0.75.
  PressureAmplifier amp;
  amp.weights = {1.30, 0.95, 0.85, 0.80, 0.75, 1.00, 1.20, 1.15};
  const double mean = mean_of(amp.weights);
  for (auto& w : amp.weights) w /= mean;
  return amp;
}

void PressureAmplifier::validate() const {
  for (double w : weights) {
    if (!std::isfinite(w) || w < kMinWeight - 1e-12 || w > kMaxWeight + 1e-12) {
      throw ValidationError("amplifier weight " + text::format_double(w) + " outside [0.5, 2]");
    }
  }
  if (std::abs(mean_of(weights) - 1.0) > 1e-9) throw ValidationError("amplifier weights must average 1");
}

PressureVector sample_pressure_at(const Sides& sides, Vec2 center, const ControlParams& params, double radius) {
  PressureVector v;
  v.radius = radius;
  v.variant = PressureVariant::vanilla;
  for (int k = 0; k < kDirections; ++k) {
    v.values[k] = defensive_control(sides, center + radius * direction8(k), params);
  }
  return v;
}

PressureVector sample_pressure_circle(const Frame& frame, std::string_view attacking_team, std::string_view player_id,
                                      const ControlParams& params, double radius) {
  const PlayerState* player = frame.find(player_id);
  if (!player) {
    throw ValidationError("player " + std::string(player_id) + " not present in frame " +
                          std::to_string(frame.frame_index));
  }
  if (player->team != attacking_team) {
    throw ValidationError("player " + std::string(player_id) + " is on the defending side");
  }
  return sample_pressure_at(split_sides(frame, attacking_team), player->position, params, radius);
}

int orientation_bin(double theta) {
  const double bins = wrap_angle(theta) * kDirections / kTwoPi;
  return static_cast<int>(std::llround(bins)) % kDirections;
}

PressureVector apply_amplifier(const PressureVector& vanilla, double theta, const PressureAmplifier& amp) {
  if (!std::isfinite(theta)) throw ValidationError("orientation is not finite");
  if (vanilla.variant != PressureVariant::vanilla) throw ValidationError("apply_amplifier expects a vanilla vector");
  const int r = orientation_bin(theta);
  PressureVector out = vanilla;
  out.variant = PressureVariant::amplified;
  for (int k = 0; k < kDirections; ++k) {
    const int rel = ((k - r) % kDirections + kDirections) % kDirections;
    out.values[k] = std::clamp(amp.weights[rel] * vanilla.values[k], 0.0, 1.0);
  }
  return out;
}

namespace {

double mean_clamped(const std::array<double, kDirections>& w, double scale) {
  double sum = 0.0;
  for (double x : w) {
    sum += std::clamp(scale * x, PressureAmplifier::kMinWeight, PressureAmplifier::kMaxWeight);
  }
  return sum / kDirections;
}

}  // namespace

PressureAmplifier estimate_amplifier(std::span<const AmplifierSample> samples, std::size_t min_samples) {
  if (samples.size() < min_samples) {
    throw ValidationError("amplifier estimation needs at least " + std::to_string(min_samples) + " samples, got " +
                          std::to_string(samples.size()));
  }
  std::array<double, kDirections> fail_sum{}, ok_sum{};
  std::size_t fails = 0, oks = 0;
  for (const auto& s : samples) {
    const int r = orientation_bin(s.theta);
    auto& sum = s.outcome == Outcome::failure ? fail_sum : ok_sum;
    for (int d = 0; d < kDirections; ++d) sum[d] += s.vanilla.values[(d + r) % kDirections];
    (s.outcome == Outcome::failure ? fails : oks) += 1;
  }
  if (fails == 0 || oks == 0) throw ValidationError("amplifier estimation needs both pass outcomes");

  constexpr double kFloor = 1e-6;
  std::array<double, kDirections> clamped{};
  for (int d = 0; d < kDirections; ++d) {
    const double fail_mean = fail_sum[d] / static_cast<double>(fails);
    const double ok_mean = std::max(ok_sum[d] / static_cast<double>(oks), kFloor);
    clamped[d] = std::clamp(fail_mean / ok_mean, PressureAmplifier::kMinWeight, PressureAmplifier::kMaxWeight);
  }

  PressureAmplifier amp;
  const double mean = mean_of(clamped);
  bool in_range = true;
  for (int d = 0; d < kDirections; ++d) {
    amp.weights[d] = clamped[d] / mean;
    in_range = in_range && amp.weights[d] >= PressureAmplifier::kMinWeight && amp.weights[d] <= PressureAmplifier::kMaxWeight;
  }
  if (in_range) return amp;

  // Rescaling pushed a weight out of range: find the scale s at which
  // mean(clamp(s·w)) = 1. The mean is continuous and non-decreasing in s,
  // running from 0.5 to 2, so bisection converges.
  double lo = 0.0, hi = 1.0;
  while (mean_clamped(clamped, hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_clamped(clamped, mid) < 1.0) lo = mid;
    else hi = mid;
  }
  for (int d = 0; d < kDirections; ++d) {
    amp.weights[d] = std::clamp(hi * clamped[d], PressureAmplifier::kMinWeight, PressureAmplifier::kMaxWeight);
  }
  // Spread the residual over unclamped weights so the mean is 1 to rounding.
  const double residual = kDirections * (1.0 - mean_of(amp.weights));
  int free_count = 0;
  for (double w : amp.weights) free_count += (w > PressureAmplifier::kMinWeight && w < PressureAmplifier::kMaxWeight);
  if (free_count > 0) {
    for (auto& w : amp.weights) {
      if (w > PressureAmplifier::kMinWeight && w < PressureAmplifier::kMaxWeight) w += residual / free_count;
    }
  }
  return amp;
}

double scalar_pressure(const PressureVector& v) { return mean_of(v.values); }

PressureLevel pressure_level(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("scalar pressure " + text::format_double(s) + " outside [0, 1]");
  if (s <= 1.0 / 3.0) return PressureLevel::low;
  if (s <= 2.0 / 3.0) return PressureLevel::medium;
  return PressureLevel::high;
}

std::optional<OrientationEstimate> orientation_for(const Frame& frame, std::string_view player_id,
                                                   const OrientationIndex& orientations, double min_speed) {
  if (const auto* record = orientations.find(frame.frame_index, player_id)) {
    return OrientationEstimate{record->theta, record->source};
  }
  const PlayerState* player = frame.find(player_id);
  if (!player || !player->velocity) return std::nullopt;
  const Vec2 v = *player->velocity;
  if (norm(v) < min_speed) return std::nullopt;
  return OrientationEstimate{wrap_angle(std::atan2(v.y, v.x)), OrientationSource::velocity_fallback};
}

PressureAmplifier parse_amplifier(std::istream& in) {
  std::string line;
  if (!text::read_line(in, line) || text::trim(line) != "relative_direction,weight") {
    throw ValidationError("amplifier file: expected header 'relative_direction,weight'");
  }
  PressureAmplifier amp;
  std::array<bool, kDirections> seen{};
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line);
    auto d = f.size() == 2 ? text::parse_int(f[0]) : std::nullopt;
    auto w = f.size() == 2 ? text::parse_double(f[1]) : std::nullopt;
    if (!d || !w || *d < 0 || *d >= kDirections) {
      throw ValidationError("amplifier file line " + std::to_string(line_no) + ": malformed row");
    }
    amp.weights[*d] = *w;
    seen[*d] = true;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw ValidationError("amplifier file must list all 8 relative directions");
  }
  amp.validate();
  return amp;
}

void write_amplifier(std::ostream& out, const PressureAmplifier& amp) {
  out << "relative_direction,weight\n";
  for (int d = 0; d < kDirections; ++d) out << d << ',' << text::format_double(amp.weights[d]) << '\n';
}

void write_pressure_dump(std::ostream& out, const std::vector<PressureRow>& rows) {
  out << "frame,player_id,k0,k1,k2,k3,k4,k5,k6,k7,scalar,level,variant\n";
  for (const auto& row : rows) {
    out << row.frame_index << ',' << row.player_id;
    for (double v : row.pressure.values) out << ',' << text::format_double(v);
    const double s = scalar_pressure(row.pressure);
    out << ',' << text::format_double(s) << ',' << static_cast<int>(pressure_level(std::clamp(s, 0.0, 1.0))) << ','
        << to_string(row.pressure.variant) << '\n';
  }
}

}  // namespace pressmap
