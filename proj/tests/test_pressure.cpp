#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pressmap/error.hpp"
#include "pressmap/pressure.hpp"
#include "test_support.hpp"

namespace pressmap {
namespace {

const ControlParams kDefaults;

double mean(const std::array<double, 8>& w) { return std::accumulate(w.begin(), w.end(), 0.0) / 8.0; }

PressureVector vec(std::array<double, 8> v) {
  PressureVector p;
  p.values = v;
  return p;
}

TEST(PressureCircle, EqualsPointwiseControl) {
  Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const Frame f = testing::random_frame(rng);
    for (const auto& p : f.players) {
      if (p.team != "home") continue;
      const auto v = sample_pressure_circle(f, "home", p.player_id, kDefaults);
      for (int k = 0; k < 8; ++k) {
        const double a = 2.0 * M_PI * k / 8.0;
        const Vec2 q{p.position.x + 0.5 * std::cos(a), p.position.y + 0.5 * std::sin(a)};
        EXPECT_EQ(v.values[k], defensive_control(f, "home", q, kDefaults));
      }
    }
  }
}

TEST(PressureCircle, NoDefendersAllZero) {
  Rng rng(1);
  Frame f = testing::random_frame(rng);
  std::erase_if(f.players, [](const PlayerState& p) { return p.team == "away"; });
  const auto v = sample_pressure_circle(f, "home", "h3", kDefaults);
  for (double x : v.values) EXPECT_EQ(x, 0.0);
}

TEST(PressureCircle, DefenderToTheNorthPeaksAtIndexTwo) {
  Frame f;
  f.players.push_back({"h1", "home", {50, 30}, Vec2{0, 0}, std::nullopt});
  f.players.push_back({"h2", "home", {90, 60}, Vec2{0, 0}, std::nullopt});
  f.players.push_back({"a1", "away", {50, 30.5}, Vec2{0, 0}, std::nullopt});
  const auto v = sample_pressure_circle(f, "home", "h1", kDefaults);
  EXPECT_EQ(std::max_element(v.values.begin(), v.values.end()) - v.values.begin(), 2);
}

TEST(PressureCircle, NearTouchlineAndErrors) {
  Frame f;
  f.players.push_back({"h1", "home", {50, 0.3}, Vec2{0, 0}, std::nullopt});
  f.players.push_back({"a1", "away", {52, 2}, Vec2{0, 0}, std::nullopt});
  const auto v = sample_pressure_circle(f, "home", "h1", kDefaults);
  for (double x : v.values) EXPECT_TRUE(std::isfinite(x));
  EXPECT_THROW(sample_pressure_circle(f, "home", "h9", kDefaults), ValidationError);
  EXPECT_THROW(sample_pressure_circle(f, "home", "a1", kDefaults), ValidationError);
}

TEST(Amplifier, DefaultsEmphasizeFrontAndRight) {
  const auto amp = PressureAmplifier::defaults();
  EXPECT_NO_THROW(amp.validate());
  EXPECT_NEAR(mean(amp.weights), 1.0, 1e-12);
  EXPECT_EQ(std::max_element(amp.weights.begin(), amp.weights.end()) - amp.weights.begin(), 0);
  EXPECT_GT(amp.weights[6], amp.weights[2]);  // right over left
  EXPECT_GT(amp.weights[7], amp.weights[1]);
}

TEST(Amplifier, IdentityIsFixedPoint) {
  const auto v = vec({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
  for (double theta : {0.0, 1.0, 4.0}) {
    const auto out = apply_amplifier(v, theta, PressureAmplifier::identity());
    EXPECT_EQ(out.values, v.values);
    EXPECT_EQ(out.variant, PressureVariant::amplified);
  }
}

TEST(Amplifier, RotationByTheta) {
  PressureAmplifier amp;
  amp.weights = {2.0, 1.0, 0.5, 1.0, 1.0, 1.0, 0.5, 1.0};
  const auto v = vec({0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3});
  const auto zero = apply_amplifier(v, 0.0, amp);
  for (int k = 0; k < 8; ++k) EXPECT_DOUBLE_EQ(zero.values[k], std::clamp(amp.weights[k] * 0.3, 0.0, 1.0));
  const auto quarter = apply_amplifier(v, M_PI / 2.0, amp);
  for (int k = 0; k < 8; ++k) EXPECT_DOUBLE_EQ(quarter.values[k], amp.weights[(k + 6) % 8] * 0.3);
  const auto wrapped = apply_amplifier(v, M_PI / 2.0 + 2.0 * M_PI, amp);
  EXPECT_EQ(wrapped.values, quarter.values);
  EXPECT_THROW(apply_amplifier(v, NAN, amp), ValidationError);
}

TEST(Amplifier, ClipsToUnitInterval) {
  PressureAmplifier amp;
  amp.weights = {2.0, 2.0, 2.0, 2.0, 0.5, 0.5, 0.5, 0.5};
  const auto out = apply_amplifier(vec({0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9}), 0.0, amp);
  for (double x : out.values) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
  EXPECT_EQ(out.values[0], 1.0);
}

std::vector<AmplifierSample> planted(std::array<double, 8> fail, std::array<double, 8> ok, int n) {
  std::vector<AmplifierSample> s;
  for (int i = 0; i < n; ++i) {
    s.push_back({vec(fail), 0.0, Outcome::failure});
    s.push_back({vec(ok), 0.0, Outcome::success});
  }
  return s;
}

TEST(EstimateAmplifier, EqualMeansGiveOnes) {
  const auto amp = estimate_amplifier(planted({.3, .3, .3, .3, .3, .3, .3, .3}, {.3, .3, .3, .3, .3, .3, .3, .3}, 30));
  for (double w : amp.weights) EXPECT_NEAR(w, 1.0, 1e-12);
}

TEST(EstimateAmplifier, DoubleFrontFailure) {
  const auto amp = estimate_amplifier(planted({.6, .3, .3, .3, .3, .3, .3, .3}, {.3, .3, .3, .3, .3, .3, .3, .3}, 30));
  for (int d = 1; d < 8; ++d) EXPECT_GT(amp.weights[0], amp.weights[d]);
  EXPECT_NEAR(mean(amp.weights), 1.0, 1e-9);
}

TEST(EstimateAmplifier, Guards) {
  const auto few = planted({.3, .3, .3, .3, .3, .3, .3, .3}, {.3, .3, .3, .3, .3, .3, .3, .3}, 5);
  EXPECT_THROW(estimate_amplifier(few), ValidationError);
  std::vector<AmplifierSample> one_sided(60, {vec({.3, .3, .3, .3, .3, .3, .3, .3}), 0.0, Outcome::success});
  EXPECT_THROW(estimate_amplifier(one_sided), ValidationError);
}

TEST(EstimateAmplifier, InvariantsOnRandomInputs) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AmplifierSample> s;
    const int n = 50 + static_cast<int>(rng.below(100));
    for (int i = 0; i < n; ++i) {
      std::array<double, 8> v{};
      for (auto& x : v) x = rng.uniform() * rng.uniform();
      s.push_back({vec(v), rng.uniform(0.0, 2.0 * M_PI), i % 2 ? Outcome::failure : Outcome::success});
    }
    const auto amp = estimate_amplifier(s);
    EXPECT_NO_THROW(amp.validate());
    for (double w : amp.weights) {
      EXPECT_GE(w, 0.5);
      EXPECT_LE(w, 2.0);
    }
  }
}

TEST(EstimateAmplifier, ExtremeRatiosStayClampedWithMeanOne) {
  const auto amp = estimate_amplifier(planted({.9, .9, .9, .9, .9, .9, .9, 1e-3}, {.01, .01, .01, .01, .01, .01, .01, .9}, 30));
  EXPECT_NO_THROW(amp.validate());
  EXPECT_NEAR(mean(amp.weights), 1.0, 1e-9);
}

TEST(ScalarPressure, Examples) {
  EXPECT_EQ(scalar_pressure(vec({0, 0, 0, 0, 0, 0, 0, 0})), 0.0);
  EXPECT_EQ(scalar_pressure(vec({1, 1, 1, 1, 1, 1, 1, 1})), 1.0);
  EXPECT_DOUBLE_EQ(scalar_pressure(vec({.8, .8, .8, .8, 0, 0, 0, 0})), 0.4);
}

TEST(PressureLevel, Buckets) {
  EXPECT_EQ(pressure_level(1.0 / 3.0), PressureLevel::low);
  EXPECT_EQ(pressure_level(0.5), PressureLevel::medium);
  EXPECT_EQ(pressure_level(0.9), PressureLevel::high);
  EXPECT_EQ(pressure_level(0.0), PressureLevel::low);
  EXPECT_EQ(pressure_level(1.0), PressureLevel::high);
  EXPECT_THROW(pressure_level(1.2), ValidationError);
  EXPECT_THROW(pressure_level(-0.1), ValidationError);
}

TEST(OrientationFor, Fallbacks) {
  Frame f;
  f.frame_index = 4;
  f.players.push_back({"7", "home", {10, 10}, Vec2{0, 2}, std::nullopt});
  f.players.push_back({"8", "home", {12, 10}, Vec2{0.1, 0}, std::nullopt});
  const OrientationIndex idx({{4, "7", 1.0, OrientationSource::annotated}});
  const auto rec = orientation_for(f, "7", idx);
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->theta, 1.0);
  EXPECT_EQ(rec->source, OrientationSource::annotated);

  const auto vel = orientation_for(f, "7", OrientationIndex{});
  ASSERT_TRUE(vel);
  EXPECT_DOUBLE_EQ(vel->theta, M_PI / 2.0);
  EXPECT_EQ(vel->source, OrientationSource::velocity_fallback);

  EXPECT_FALSE(orientation_for(f, "8", OrientationIndex{}).has_value());
}

TEST(AmplifierFile, RoundTrip) {
  const auto amp = PressureAmplifier::defaults();
  std::stringstream buf;
  write_amplifier(buf, amp);
  EXPECT_EQ(parse_amplifier(buf).weights, amp.weights);
  std::istringstream bad("relative_direction,weight\n0,3\n1,1\n2,1\n3,1\n4,1\n5,1\n6,1\n7,1\n");
  EXPECT_THROW(parse_amplifier(bad), ValidationError);
}

TEST(PressureDump, Columns) {
  std::ostringstream out;
  write_pressure_dump(out, {{3, "7", vec({.8, .8, .8, .8, 0, 0, 0, 0})}});
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "frame,player_id,k0,k1,k2,k3,k4,k5,k6,k7,scalar,level,variant");
  EXPECT_EQ(row.substr(0, 4), "3,7,");
  EXPECT_NE(row.find(",0.4,2,vanilla"), std::string::npos) << row;
}

}  // namespace
}  // namespace pressmap
