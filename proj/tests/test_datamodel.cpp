#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pressmap/datamodel.hpp"
#include "pressmap/error.hpp"
#include "pressmap/tracking_io.hpp"

namespace pressmap {
namespace {

std::string tracking_csv(const std::string& rows) { return std::string(kTrackingHeader) + "\n" + rows; }

TEST(ParseTracking, SingleRowWithoutVelocity) {
  std::istringstream in(tracking_csv("0,0.00,home,7,52.5,34.0,,\n"));
  const auto seq = parse_tracking(in);
  ASSERT_EQ(seq.frames.size(), 1u);
  const auto* p = seq.frames[0].find("7");
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->position, (Vec2{52.5, 34.0}));
  EXPECT_FALSE(p->velocity.has_value());
}

TEST(ParseTracking, FiftyFramesAtTwentyFiveHertz) {
  std::ostringstream rows;
  for (int i = 0; i < 50; ++i) rows << i << ',' << i * 0.04 << ",home,7,50,30,,\n";
  std::istringstream in(tracking_csv(rows.str()));
  const auto seq = parse_tracking(in);
  EXPECT_EQ(seq.frames.size(), 50u);
  EXPECT_NEAR(seq.frame_rate_hz, 25.0, 1e-6);
}

TEST(ParseTracking, OutOfBoundsRowNamesTheLine) {
  std::istringstream in(tracking_csv("0,0.00,home,7,52.5,34.0,,\n1,0.04,home,7,200.0,34.0,,\n"));
  try {
    parse_tracking(in);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ParseTracking, RejectsDuplicatesAndBackwardsTime) {
  std::istringstream dup(tracking_csv("0,0.00,home,7,1,1,,\n0,0.00,home,7,2,2,,\n"));
  EXPECT_THROW(parse_tracking(dup), ValidationError);
  std::istringstream back(tracking_csv("0,0.04,home,7,1,1,,\n1,0.00,home,7,2,2,,\n"));
  EXPECT_THROW(parse_tracking(back), ValidationError);
  std::istringstream header("frame,x\n");
  EXPECT_THROW(parse_tracking(header), ValidationError);
}

TEST(ParseTracking, RoundTrip) {
  std::istringstream in(tracking_csv(
      "0,0,home,7,10.25,20.5,1.5,-2\n0,0,away,3,30,40,,\n0,0,none,ball,11,21,,\n"
      "1,0.04,home,7,10.31,20.42,1.5,-2\n1,0.04,away,3,30.1,40,,\n1,0.04,none,ball,11.2,21,,\n"));
  const auto a = parse_tracking(in);
  std::stringstream buf;
  write_tracking(buf, a);
  const auto b = parse_tracking(buf);
  EXPECT_EQ(a, b);
  ASSERT_TRUE(a.frames[0].ball.has_value());
  EXPECT_EQ(a.frames[0].ball->position, (Vec2{11, 21}));
}

TEST(ParseEvents, PassSortedAndKindGuard) {
  std::istringstream in(std::string(kEventsHeader) +
                        "\ne2,dribble,home,7,30,40,failure,1,1,2,2\ne1,pass,home,7,10,20,success,1,1,2,2\n");
  const auto events = parse_events(in);
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].event_id, "e1");
  EXPECT_EQ(events[0].kind, EventKind::pass);
  EXPECT_EQ(events[0].outcome, Outcome::success);
  EXPECT_EQ(events[1].kind, EventKind::dribble);

  std::istringstream bad(std::string(kEventsHeader) + "\ne1,throwin,home,7,10,20,success,1,1,2,2\n");
  try {
    parse_events(bad);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("pass"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("clearance"), std::string::npos) << e.what();
  }
}

TEST(ParseEvents, RoundTrip) {
  std::istringstream in(std::string(kEventsHeader) + "\ne1,pass,home,7,10,20,success,1.5,1,2,2.25\n");
  const auto a = parse_events(in);
  std::stringstream buf;
  write_events(buf, a);
  EXPECT_EQ(parse_events(buf), a);
}

TEST(ParseOrientations, NormalizesTheta) {
  std::istringstream in(std::string(kOrientationsHeader) + "\n0,7,-1.5707963267948966,annotated\n1,7,7.0,pose-estimated\n");
  const auto recs = parse_orientations(in);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_NEAR(recs[0].theta, 3.0 * M_PI / 2.0, 1e-12);
  EXPECT_NEAR(recs[1].theta, 7.0 - 2.0 * M_PI, 1e-12);
  EXPECT_EQ(recs[1].source, OrientationSource::pose_estimated);

  std::istringstream empty(std::string(kOrientationsHeader) + "\n");
  EXPECT_TRUE(parse_orientations(empty).empty());
  std::istringstream nan(std::string(kOrientationsHeader) + "\n0,7,nan,annotated\n");
  EXPECT_THROW(parse_orientations(nan), ValidationError);
}

TEST(ParseOrientations, UnknownPlayerRejectedWithTracking) {
  std::istringstream t(tracking_csv("0,0.00,home,7,52.5,34.0,,\n"));
  const auto seq = parse_tracking(t);
  std::istringstream in(std::string(kOrientationsHeader) + "\n0,99,1.0,annotated\n");
  EXPECT_THROW(parse_orientations(in, &seq), ValidationError);
}

TrackingSequence moving_player(int frames, double step_x) {
  TrackingSequence seq;
  for (int i = 0; i < frames; ++i) {
    Frame f;
    f.frame_index = i;
    f.timestamp = i * 0.04;
    f.players.push_back({"7", "home", {10.0 + step_x * i, 30.0}, std::nullopt, std::nullopt});
    seq.frames.push_back(f);
  }
  return seq;
}

TEST(DeriveVelocities, Examples) {
  auto still = derive_velocities(moving_player(3, 0.0));
  for (const auto& f : still.frames) EXPECT_EQ(*f.players[0].velocity, (Vec2{0, 0}));

  auto moving = derive_velocities(moving_player(5, 0.2));
  for (const auto& f : moving.frames) {
    EXPECT_NEAR(f.players[0].velocity->x, 5.0, 1e-9);
    EXPECT_NEAR(f.players[0].velocity->y, 0.0, 1e-9);
  }

  auto single = derive_velocities(moving_player(1, 0.2));
  EXPECT_EQ(*single.frames[0].players[0].velocity, (Vec2{0, 0}));
}

TEST(DeriveVelocities, ClampedAndIdempotent) {
  auto fast = derive_velocities(moving_player(4, 2.0));  // 50 m/s
  for (const auto& f : fast.frames) EXPECT_NEAR(std::hypot(f.players[0].velocity->x, f.players[0].velocity->y), kSpeedCap, 1e-9);
  const auto once = derive_velocities(moving_player(6, 0.13));
  EXPECT_EQ(derive_velocities(once), once);
}

TEST(Datamodel, AttackSignAndMirror) {
  EXPECT_EQ(attack_sign(kHomeTeam), 1);
  EXPECT_EQ(attack_sign(kAwayTeam), -1);
  EXPECT_THROW(attack_sign("visitors"), ValidationError);
  EXPECT_EQ(opponent_of(kHomeTeam), kAwayTeam);

  Frame f;
  f.players.push_back({"7", "away", {10, 20}, Vec2{1, 2}, 0.5});
  f.ball = BallState{{30, 40}, std::nullopt};
  const PitchSpec pitch;
  const Frame m = mirrored(f, pitch);
  EXPECT_NEAR(m.players[0].position.x, 95, 1e-12);
  EXPECT_NEAR(m.players[0].position.y, 48, 1e-12);
  EXPECT_NEAR(m.players[0].velocity->x, -1, 1e-12);
  EXPECT_NEAR(*m.players[0].orientation, 0.5 + M_PI, 1e-12);
  EXPECT_EQ(mirrored(m, pitch).players[0].position, f.players[0].position);
}

TEST(Datamodel, InferBallOwner) {
  TrackingSequence seq = moving_player(1, 0.0);
  seq.frames[0].players.push_back({"3", "away", {12, 30}, std::nullopt, std::nullopt});
  seq.frames[0].ball = BallState{{10.5, 30}, std::nullopt};
  infer_ball_owners(seq);
  EXPECT_EQ(seq.frames[0].ball_owner, std::optional<std::string>("7"));
  seq.frames[0].ball = BallState{{50, 50}, std::nullopt};
  infer_ball_owners(seq);
  EXPECT_FALSE(seq.frames[0].ball_owner.has_value());
}

TEST(Datamodel, ResampleFiftyHertzToTwentyFive) {
  TrackingSequence seq;
  for (int i = 0; i < 100; ++i) {
    Frame f;
    f.frame_index = i;
    f.timestamp = i * 0.02;
    f.players.push_back({"7", "home", {10.0 + i, 30.0}, std::nullopt, std::nullopt});
    seq.frames.push_back(f);
  }
  seq.frame_rate_hz = 50.0;
  std::vector<Event> events{{"e1", EventKind::pass, "home", "7", 40, 60, Outcome::success, {}, {}}};
  std::vector<OrientationRecord> orients{{40, "7", 1.0, OrientationSource::annotated}};
  resample(seq, events, orients);
  EXPECT_EQ(seq.frames.size(), 50u);
  EXPECT_TRUE(seq.contiguous());
  EXPECT_EQ(events[0].start_frame, 20);
  EXPECT_EQ(events[0].end_frame, 30);
  EXPECT_EQ(orients[0].frame_index, 20);
}

}  // namespace
}  // namespace pressmap
