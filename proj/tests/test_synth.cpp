#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pressmap/analytics.hpp"
#include "pressmap/error.hpp"
#include "pressmap/pipeline.hpp"
#include "pressmap/synth.hpp"
#include "pressmap/tracking_io.hpp"

namespace pressmap {
namespace {

std::string serialized(const SynthMatch& m) {
  std::ostringstream out;
  write_tracking(out, m.data.tracking);
  write_events(out, m.data.events);
  write_orientations(out, m.data.orientations);
  return out.str();
}

SynthConfig short_config(double lambda, std::uint64_t seed = 1) {
  SynthConfig c;
  c.seed = seed;
  c.duration_seconds = 120;
  c.press_intensity = lambda;
  return c;
}

TEST(Simulate, Deterministic) {
  const auto c = short_config(0.6, 4);
  EXPECT_EQ(serialized(simulate_match(c)), serialized(simulate_match(c)));
  auto other = c;
  other.seed = 5;
  EXPECT_NE(serialized(simulate_match(c)), serialized(simulate_match(other)));
}

TEST(Simulate, FilesPassValidation) {
  const auto m = simulate_match(short_config(0.5, 2), "check");
  const auto dir = std::filesystem::temp_directory_path() / "pressmap_synth_files";
  std::filesystem::remove_all(dir);
  write_synth_match(dir, m);
  for (auto f : {kTrackingFile, kEventsFile, kOrientationsFile, kSynthManifestFile}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  const auto loaded = load_match(dir);
  EXPECT_EQ(loaded.tracking.frames.size(), m.data.tracking.frames.size());
  EXPECT_EQ(loaded.events.size(), m.data.events.size());
  EXPECT_EQ(loaded.orientations.size(), m.data.orientations.size());
  const auto issues = check_event_frames(loaded.events, loaded.tracking);
  EXPECT_TRUE(issues.empty()) << issues.front();
  std::ifstream manifest(dir / kSynthManifestFile);
  const std::string text((std::istreambuf_iterator<char>(manifest)), {});
  EXPECT_NE(text.find("\"calibration\""), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Simulate, ElevenAPiece) {
  const auto m = simulate_match(short_config(0.5));
  for (const auto& f : m.data.tracking.frames) {
    int home = 0, away = 0;
    for (const auto& p : f.players) (p.team == "home" ? home : away) += 1;
    ASSERT_EQ(home, 11);
    ASSERT_EQ(away, 11);
    ASSERT_TRUE(f.ball.has_value());
  }
}

TEST(Simulate, NoPressMeansLowPressure) {
  const MatchContext ctx(simulate_match(short_config(0.0, 3)).data);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& poss : ctx.possessions()) {
    for (auto f = poss.start_frame; f <= poss.end_frame; f += 5) {
      for (const auto& [id, v] : ctx.pressures(f, poss.team, PpmVariant::ppm2d)) {
        if (id == kBallId) continue;
        sum += scalar_pressure(v);
        ++n;
      }
    }
  }
  ASSERT_GT(n, 0u);
  EXPECT_LT(sum / static_cast<double>(n), 0.1);
}

double loss_frequency(double lambda, std::size_t* possessions = nullptr) {
  SynthConfig c;
  c.seed = 17;
  c.duration_seconds = 3000;
  c.press_intensity = lambda;
  const auto m = simulate_match(c);
  std::size_t finished = 0;
  for (const auto& p : m.possessions) finished += p.outcome != "end_of_data";
  if (possessions) *possessions = finished;
  return m.loss_rate(lambda);
}

TEST(Simulate, CalibratedLossRates) {
  std::size_t n_low = 0, n_high = 0;
  const double low = loss_frequency(0.2, &n_low);
  const double high = loss_frequency(0.9, &n_high);
  EXPECT_GE(n_low, 200u);
  EXPECT_GE(n_high, 200u);
  EXPECT_GT(high, low);
  EXPECT_NEAR(low, 0.2, 0.1);
  EXPECT_NEAR(high, 0.8, 0.1);
}

TEST(Simulate, HazardMonotoneInPress) {
  double previous = -1.0;
  for (double lambda : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double rate = loss_frequency(lambda);
    EXPECT_GE(rate, previous) << "lambda " << lambda;
    previous = rate;
  }
}

TEST(Simulate, FailedPassesFacePressure) {
  SynthConfig c;
  c.seed = 8;
  c.duration_seconds = 1200;
  c.press_mix = {0.2, 0.8};
  const MatchContext ctx(simulate_match(c).data);
  double fail = 0, ok = 0;
  std::size_t nf = 0, no = 0;
  for (const auto& s : pass_amplifier_samples(ctx)) {
    (s.outcome == Outcome::failure ? fail : ok) += scalar_pressure(s.vanilla);
    (s.outcome == Outcome::failure ? nf : no) += 1;
  }
  ASSERT_GT(nf, 10u);
  ASSERT_GT(no, 10u);
  EXPECT_GT(fail / nf, ok / no);
}

TEST(Simulate, ConfigValidation) {
  auto c = short_config(1.5);
  EXPECT_THROW(simulate_match(c), ValidationError);
  c = short_config(0.5);
  c.orientation_effect = -1;
  EXPECT_THROW(simulate_match(c), ValidationError);
  c = short_config(0.5);
  c.duration_seconds = 0;
  EXPECT_THROW(simulate_match(c), ValidationError);
}

TEST(Oracle, ForcedHazards) {
  auto c = short_config(0.5, 6);
  c.hazard_override = 0.0;
  const auto zero = oracle_loss_probability(c, 400, 200);
  EXPECT_EQ(zero.probability, 0.0);
  EXPECT_EQ(zero.standard_error, 0.0);
  c.hazard_override = 1.0;
  const auto one = oracle_loss_probability(c, 400, 200);
  EXPECT_EQ(one.probability, 1.0);
  EXPECT_EQ(one.standard_error, 0.0);
}

TEST(Oracle, SelfConsistentAcrossRolloutSeeds) {
  const auto c = short_config(0.5, 7);
  const auto a = oracle_loss_probability(c, 1000, 10000, 1);
  const auto b = oracle_loss_probability(c, 1000, 10000, 2);
  EXPECT_EQ(a.rollouts, 10000u);
  const double se = std::hypot(a.standard_error, b.standard_error);
  EXPECT_LE(std::abs(a.probability - b.probability), 3.0 * std::max(se, 1e-12));
}

TEST(ScriptedPress, OneHazardFreePossession) {
  PressScript script{{{0.0, 0.1}, {6.0, 0.9}, {12.0, 0.1}}};
  EXPECT_DOUBLE_EQ(script.at(3.0), 0.5);
  EXPECT_DOUBLE_EQ(script.at(20.0), 0.1);
  const auto m = simulate_scripted_press(SynthConfig{}, script);
  ASSERT_EQ(m.possessions.size(), 1u);
  EXPECT_EQ(m.possessions[0].outcome, "stoppage");
  const auto poss = segment_all_possessions(m.data.events, m.data.tracking);
  ASSERT_FALSE(poss.empty());
  EXPECT_EQ(poss[0].team, "home");
  EXPECT_GE(poss[0].duration, 11.9);
}

}  // namespace
}  // namespace pressmap
