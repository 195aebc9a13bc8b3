#include "pressmap/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "pressmap/error.hpp"
#include "pressmap/pressure.hpp"
#include "pressmap/rng.hpp"
#include "pressmap/tracking_io.hpp"

namespace pressmap {

void SynthConfig::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(duration_seconds > 0.0)) throw ValidationError("duration must be positive");
  if (!in_unit(press_intensity)) throw ValidationError("press intensity must lie in [0, 1]");
  for (double l : press_mix) {
    if (!in_unit(l)) throw ValidationError("press mix values must lie in [0, 1]");
  }
  if (!(orientation_effect >= 0.0)) throw ValidationError("orientation effect must be non-negative");
  if (!(pass_rate > 0.0)) throw ValidationError("pass rate must be positive");
  if (!(attacker_max_speed > 0.0) || !(defender_max_speed > 0.0)) throw ValidationError("speed caps must be positive");
  if (!(pitch.length > 0.0) || !(pitch.width > 0.0)) throw ValidationError("pitch dimensions must be positive");
  if (!(min_possession_seconds > 0.0) || max_possession_seconds < min_possession_seconds) {
    throw ValidationError("possession length range is invalid");
  }
  if (!(grace_seconds >= 0.0)) throw ValidationError("grace period must be non-negative");
  if (!(press_ramp_seconds >= 0.0)) throw ValidationError("press ramp must be non-negative");
  if (!in_unit(direct_share)) throw ValidationError("direct share must lie in [0, 1]");
  if (!(style_bias >= 0.0)) throw ValidationError("style bias must be non-negative");
  if (!(pressed_hold_factor >= 0.0)) throw ValidationError("pressed hold factor must be non-negative");
  if (!std::isfinite(hazard_c0) || !std::isfinite(hazard_c1)) throw ValidationError("hazard constants must be finite");
  if (hazard_override && !in_unit(*hazard_override)) throw ValidationError("hazard override must lie in [0, 1]");
}

double SynthMatch::loss_rate(double lambda) const {
  std::size_t finished = 0, lost = 0;
  for (const auto& p : possessions) {
    if (std::abs(p.press_intensity - lambda) > 1e-12 || p.outcome == "end_of_data") continue;
    ++finished;
    lost += p.outcome == "lost";
  }
  return finished == 0 ? 0.0 : static_cast<double>(lost) / static_cast<double>(finished);
}

double PressScript::at(double t) const {
  if (points.empty()) return 0.0;
  if (t <= points.front().first) return points.front().second;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (t <= points[i].first) {
      const auto [t0, l0] = points[i - 1];
      const auto [t1, l1] = points[i];
      return t1 > t0 ? l0 + (l1 - l0) * (t - t0) / (t1 - t0) : l1;
    }
  }
  return points.back().second;
}

namespace {

constexpr int kTeamSize = 11;
constexpr double kDt = 1.0 / kNominalFrameRate;

// Shapes in attack coordinates (own goal at x = 0). Slot 0 is the keeper.
constexpr std::array<std::array<double, 2>, kTeamSize> kAttackShape = {{
    {10, 34}, {28, 10}, {26, 26}, {26, 42}, {28, 58}, {44, 16}, {42, 34}, {44, 52}, {58, 14}, {62, 34}, {58, 54}}};
// The defending block seen from the attackers, i.e. near x = 105.
constexpr std::array<std::array<double, 2>, kTeamSize> kDefendShape = {{
    {100, 34}, {88, 12}, {90, 27}, {90, 41}, {88, 56}, {80, 16}, {82, 34}, {80, 52}, {73, 22}, {72, 34}, {73, 46}}};
constexpr int kRestartSlot = 2;
// The nearest defender commits to the carrier with a probability rising
// linearly in λ from kCommitFloor to kCommitFloor + kCommitSpan; otherwise
// it presses with a gain capped at kUncommittedGain.
constexpr double kCommitFloor = 0.18;
constexpr double kCommitSpan = 0.67;
constexpr double kUncommittedGain = 0.6;
constexpr std::int64_t kRescanFrames = 12;

Vec2 shape_point(const std::array<std::array<double, 2>, kTeamSize>& shape, int slot) {
  return {shape[static_cast<std::size_t>(slot)][0], shape[static_cast<std::size_t>(slot)][1]};
}

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

Vec2 cap(Vec2 v, double max_norm) {
  const double n = norm(v);
  return n > max_norm ? v * (max_norm / n) : v;
}

struct Agent {
  std::string id;
  int team = 0;  // 0 home, 1 away
  int slot = 0;
  Vec2 pos;
  Vec2 vel;
  double phase_x = 0, phase_y = 0, omega = 1;
};

enum class Phase { hold, pass, stoppage };

class Simulator {
 public:
  Simulator(const SynthConfig& config, std::string match_id)
      : config_(config), rng_(config.seed), match_id_(std::move(match_id)) {
    config_.validate();
    for (int t = 0; t < 2; ++t) {
      for (int s = 0; s < kTeamSize; ++s) {
        Agent a;
        a.id = std::string(t == 0 ? "h" : "a") + std::to_string(s + 1);
        a.team = t;
        a.slot = s;
        a.phase_x = rng_.uniform(0, kTwoPi);
        a.phase_y = rng_.uniform(0, kTwoPi);
        a.omega = kTwoPi / rng_.uniform(4.0, 8.0);
        a.pos = to_world(t, shape_point(t == 0 ? kAttackShape : kDefendShape, s));
        agents_.push_back(a);
      }
    }
    start_possession(0, index_of(0, kRestartSlot), 0);
    ball_ = agents_[carrier_].pos;
    settle();
    ball_ = agents_[carrier_].pos;
    add_event(EventKind::carry, team_, agents_[carrier_].id, 0, hold_end_, Outcome::success, ball_, ball_);
  }

  void set_script(const PressScript& script) {
    script_ = script;
    planned_end_ = poss_start_ + static_cast<std::int64_t>(std::llround(script.duration() * kNominalFrameRate));
    hold_end_ = planned_end_ + 1;  // the carrier keeps the ball throughout
    dribble_ = false;
    drift_ = {};
    direct_ = true;
    settle();
    ball_ = agents_[carrier_].pos;
    events_.clear();
    add_event(EventKind::carry, team_, agents_[carrier_].id, 0, planned_end_, Outcome::success, ball_, ball_);
  }

  /// Puts every agent on its current target, moving with it, so play starts
  /// without a sprint into formation.
  void settle() {
    const auto t = targets();
    ++frame_;
    const auto next = targets();
    --frame_;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      Agent& a = agents_[i];
      a.pos = clamp_pitch(t[i]);
      a.vel = cap((next[i] - t[i]) * kNominalFrameRate,
                  a.team == team_ ? config_.attacker_max_speed : config_.defender_max_speed);
    }
  }

  void set_recording(bool on) { record_ = on; }
  void reseed(std::uint64_t seed) { rng_ = Rng(seed); }

  void step() {
    if (record_) record_frame();
    decide();
    move();
    ++frame_;
  }

  void finish() {
    if (phase_ != Phase::stoppage) close_possession(frame_ - 1, "end_of_data");
    // Passes and carries still running when the data ends are cut at the last frame.
    for (auto& e : events_) e.end_frame = std::min(e.end_frame, frame_ - 1);
  }

  std::int64_t frame() const { return frame_; }
  int losses() const { return losses_; }
  bool in_possession() const { return phase_ != Phase::stoppage; }

  SynthMatch result() && {
    SynthMatch out;
    out.config = config_;
    out.data.match_id = match_id_;
    out.data.tracking.frames = std::move(frames_);
    out.data.tracking.pitch = config_.pitch;
    out.data.tracking.frame_rate_hz = kNominalFrameRate;
    out.data.events = std::move(events_);
    out.data.orientations = std::move(orientations_);
    out.possessions = std::move(log_);
    return out;
  }

 private:
  std::string team_name(int team) const { return std::string(team == 0 ? kHomeTeam : kAwayTeam); }
  int index_of(int team, int slot) const { return team * kTeamSize + slot; }

  Vec2 to_world(int team, Vec2 a) const {
    return team == 0 ? a : Vec2{config_.pitch.length - a.x, config_.pitch.width - a.y};
  }
  Vec2 to_attack(int team, Vec2 w) const { return to_world(team, w); }  // the flip is its own inverse
  Vec2 dir_world(int team, Vec2 a) const { return team == 0 ? a : Vec2{-a.x, -a.y}; }

  Vec2 clamp_pitch(Vec2 p) const {
    return {std::clamp(p.x, 0.0, config_.pitch.length), std::clamp(p.y, 0.0, config_.pitch.width)};
  }

  double possession_time() const { return static_cast<double>(frame_ - poss_start_) * kDt; }

  double ramp() const {
    const double r = config_.press_ramp_seconds > 0.0 ? possession_time() / config_.press_ramp_seconds : 1.0;
    return std::clamp(r, 0.0, 1.0);
  }

  double press_level() const { return script_ ? script_->at(possession_time()) : lambda_ * ramp(); }

  double facing() const {
    const Vec2 d = agents_[target_].pos - agents_[carrier_].pos;
    return wrap_angle(std::atan2(d.y, d.x));
  }

  Vec2 facing_unit() const {
    const double th = facing();
    return {std::cos(th), std::sin(th)};
  }

  void add_event(EventKind kind, int team, const std::string& player, std::int64_t start, std::int64_t end,
                 Outcome outcome, Vec2 from, Vec2 to) {
    if (!record_) return;
    Event e;
    e.event_id = "e" + std::to_string(events_.size() + 1);
    e.kind = kind;
    e.team = team < 0 ? std::string(kBallTeam) : team_name(team);
    e.player_id = player;
    e.start_frame = start;
    e.end_frame = end;
    e.outcome = outcome;
    e.start_location = from;
    e.end_location = to;
    events_.push_back(std::move(e));
  }

  void close_possession(std::int64_t end, const char* outcome) {
    if (!record_) return;
    PossessionLog p;
    p.index = static_cast<int>(log_.size());
    p.team = team_name(team_);
    p.start_frame = poss_start_;
    p.end_frame = end;
    p.press_intensity = lambda_;
    p.style = direct_ ? "direct" : "patient";
    p.outcome = outcome;
    log_.push_back(p);
  }

  void start_possession(int team, int carrier, std::int64_t frame) {
    team_ = team;
    poss_start_ = frame;
    lambda_ = config_.press_mix.empty()
                  ? config_.press_intensity
                  : config_.press_mix[static_cast<std::size_t>(rng_.below(config_.press_mix.size()))];
    direct_ = rng_.bernoulli(config_.direct_share);
    committed_ = rng_.bernoulli(std::clamp((lambda_ - kCommitFloor) / kCommitSpan, 0.0, 1.0));
    const double length = rng_.uniform(config_.min_possession_seconds, config_.max_possession_seconds);
    planned_end_ = frame + static_cast<std::int64_t>(std::llround(length * kNominalFrameRate));
    begin_hold(carrier, frame);
  }

  void begin_hold(int carrier, std::int64_t frame) {
    phase_ = Phase::hold;
    carrier_ = carrier;
    hold_start_ = frame;
    target_ = choose_target();
    // Pressed carriers struggle to find a pass and hold the ball longer.
    const double mean_hold = (1.0 + config_.pressed_hold_factor * lambda_) / config_.pass_rate;
    hold_end_ = frame + std::max<std::int64_t>(
                            1, std::llround(rng_.uniform(0.5 * mean_hold, 1.5 * mean_hold) * kNominalFrameRate));
    dribble_ = rng_.bernoulli(0.25);
    const double a = rng_.uniform(0, kTwoPi);
    drift_ = dribble_ ? Vec2{3.0, 0.0} : Vec2{0.6 * std::cos(a), 0.6 * std::sin(a)};
    if (dribble_) {
      const Vec2 from = agents_[carrier_].pos;
      add_event(EventKind::dribble, team_, agents_[carrier_].id, frame, hold_end_, Outcome::success, from,
                clamp_pitch(from + dir_world(team_, drift_) * (static_cast<double>(hold_end_ - frame) * kDt)));
    }
  }

  int choose_target() {
    std::vector<int> options;
    const Vec2 c = agents_[carrier_].pos;
    for (int s = 1; s < kTeamSize; ++s) {
      const int i = index_of(team_, s);
      if (i == carrier_) continue;
      const double d = distance(agents_[i].pos, c);
      if (d >= 5.0 && d <= 35.0) options.push_back(i);
    }
    if (options.empty()) {
      int best = -1;
      double best_d = 1e300;
      for (int s = 1; s < kTeamSize; ++s) {
        const int i = index_of(team_, s);
        if (i == carrier_) continue;
        const double d = distance(agents_[i].pos, c);
        if (d < best_d) best_d = d, best = i;
      }
      return best;
    }
    // Direct carriers look upfield; patient ones turn their back on the
    // pressing side and play towards their own goal.
    const Vec2 away = dir_world(team_, {direct_ ? 1.0 : -1.0, 0.0});
    if (!direct_) {
      return *std::max_element(options.begin(), options.end(), [&](int a, int b) {
        const Vec2 da = agents_[a].pos - c, db = agents_[b].pos - c;
        return dot(da, away) / norm(da) < dot(db, away) / norm(db);
      });
    }
    std::vector<double> weights;
    double total = 0.0;
    for (int i : options) {
      const Vec2 d = agents_[i].pos - c;
      weights.push_back(std::exp(config_.style_bias * dot(d, away) / norm(d)));
      total += weights.back();
    }
    double u = rng_.uniform(0.0, total);
    for (std::size_t k = 0; k < options.size(); ++k) {
      if ((u -= weights[k]) <= 0.0) return options[k];
    }
    return options.back();
  }

  Sides sides_now() const {
    Sides sides;
    for (const auto& a : agents_) {
      (a.team == team_ ? sides.attackers : sides.defenders).push_back({a.pos, a.vel});
    }
    return sides;
  }

  double hazard() const {
    if (config_.hazard_override) return *config_.hazard_override;
    const PressureVector v = sample_pressure_at(sides_now(), agents_[carrier_].pos, ControlParams{});
    const int r = orientation_bin(facing());
    const double front =
        (v.values[(r + kDirections - 1) % kDirections] + v.values[r] + v.values[(r + 1) % kDirections]) / 3.0;
    return sigmoid(config_.hazard_c0 + config_.hazard_c1 * scalar_pressure(v) + config_.orientation_effect * front);
  }

  void record_frame() {
    Frame f;
    f.frame_index = frame_;
    f.timestamp = static_cast<double>(frame_) * kDt;
    for (const auto& a : agents_) {
      PlayerState p;
      p.player_id = a.id;
      p.team = team_name(a.team);
      p.position = a.pos;
      p.velocity = a.vel;
      f.players.push_back(std::move(p));
    }
    f.ball = BallState{ball_, ball_vel_};
    frames_.push_back(std::move(f));
    if (phase_ == Phase::hold) {
      orientations_.push_back({frame_, agents_[carrier_].id, facing(), OrientationSource::annotated});
    }
  }

  void decide() {
    const std::int64_t f = frame_;
    if (phase_ == Phase::stoppage) {
      if (f >= restart_frame_ && !script_) {
        const int carrier = index_of(restart_team_, kRestartSlot);
        start_possession(restart_team_, carrier, f);
        ball_ = agents_[carrier_].pos;
        add_event(EventKind::carry, team_, agents_[carrier_].id, f, hold_end_, Outcome::success, ball_, ball_);
      }
      return;
    }
    if (phase_ == Phase::pass) {
      if (f >= pass_arrival_) begin_hold(receiver_, f);
      return;
    }
    // holding
    const Vec2 c = agents_[carrier_].pos;
    if (f >= planned_end_) {
      const Vec2 goal = to_world(team_, {config_.pitch.length, config_.pitch.width / 2});
      add_event(EventKind::shot, team_, agents_[carrier_].id, f, f, Outcome::failure, c, goal);
      add_event(EventKind::other, -1, "", f + 1, f + 1, Outcome::success, goal, goal);
      close_possession(f, "stoppage");
      phase_ = Phase::stoppage;
      restart_frame_ = f + static_cast<std::int64_t>(kNominalFrameRate);
      restart_team_ = 1 - team_;
      ball_vel_ = cap(goal - c, 15.0);
      return;
    }
    if (!script_ && (config_.hazard_override || possession_time() >= config_.grace_seconds)) {
      const double h = hazard();
      if (rng_.uniform() < h) {
        int interceptor = -1;
        double best = 1e300;
        for (int s = 0; s < kTeamSize; ++s) {
          const int i = index_of(1 - team_, s);
          const double d = distance(agents_[i].pos, c);
          if (d < best) best = d, interceptor = i;
        }
        const Vec2 at = agents_[interceptor].pos;
        add_event(EventKind::pass, team_, agents_[carrier_].id, f, f + 1, Outcome::failure, c, at);
        add_event(EventKind::interception, 1 - team_, agents_[interceptor].id, f + 1, f + 1, Outcome::success, at,
                  at);
        close_possession(f, "lost");
        ++losses_;
        start_possession(1 - team_, interceptor, f + 1);
        return;
      }
    }
    // Patient carriers keep re-picking the most backward option.
    if (!direct_ && (f - hold_start_) % kRescanFrames == 0) target_ = choose_target();
    if (f >= hold_end_) {
      const Agent& to = agents_[target_];
      const double dist = distance(to.pos, c);
      const double flight = std::max(0.3, dist / 16.0);
      pass_from_ = ball_;
      pass_to_ = clamp_pitch(to.pos + to.vel * flight);
      pass_start_ = f;
      pass_arrival_ = f + std::max<std::int64_t>(1, std::llround(flight * kNominalFrameRate));
      receiver_ = target_;
      phase_ = Phase::pass;
      add_event(EventKind::pass, team_, agents_[carrier_].id, f, pass_arrival_, Outcome::success, pass_from_,
                pass_to_);
    }
  }

  Vec2 wander(const Agent& a, double amplitude) const {
    const double t = static_cast<double>(frame_) * kDt;
    return {amplitude * std::cos(a.omega * t + a.phase_x), amplitude * std::sin(0.8 * a.omega * t + a.phase_y)};
  }

  /// Where every agent is heading this frame.
  std::vector<Vec2> targets() const {
    const bool live = phase_ != Phase::stoppage;
    const int attack = live ? team_ : restart_team_;
    // Attackers push up as the possession matures; scripted presses keep
    // the shape still so that only the press changes.
    const double progress = live && !script_ ? std::min(10.0, 1.2 * possession_time()) : 0.0;

    // Focus of the press, in attack coordinates.
    const Vec2 focus_w = phase_ == Phase::pass ? pass_to_ : agents_[carrier_].pos;
    const Vec2 focus = to_attack(attack, focus_w);
    const Vec2 ball_a = to_attack(attack, ball_);
    const double lambda = live ? press_level() : 0.0;

    std::vector<Vec2> targets(agents_.size());
    // Defenders ranked by distance to the focus; the keeper never presses.
    std::vector<int> defenders;
    for (int s = 1; s < kTeamSize; ++s) defenders.push_back(index_of(1 - attack, s));
    std::stable_sort(defenders.begin(), defenders.end(), [&](int a, int b) {
      return distance(agents_[a].pos, focus_w) < distance(agents_[b].pos, focus_w);
    });

    for (int s = 0; s < kTeamSize; ++s) {
      const int i = index_of(attack, s);
      targets[i] = to_world(attack, shape_point(kAttackShape, s) + Vec2{progress, 0.0} +
                                        wander(agents_[i], script_ ? 1.0 : 3.5));
    }
    const int goalkeeper = index_of(1 - attack, 0);
    targets[goalkeeper] = to_world(attack, shape_point(kDefendShape, 0) + Vec2{0.0, 0.2 * (ball_a.y - 34.0)});
    constexpr double kSpread = 70.0 * std::numbers::pi / 180.0;
    for (std::size_t r = 0; r < defenders.size(); ++r) {
      const int i = defenders[r];
      const Agent& a = agents_[i];
      const Vec2 zonal = shape_point(kDefendShape, a.slot) + Vec2{0.0, 0.3 * (ball_a.y - 34.0)} + wander(a, 1.0);
      double gain = 0.2 * lambda;
      Vec2 mark;
      if (r == 0) {
        gain = script_ || !live ? lambda : committed_ ? ramp() : std::min(lambda, kUncommittedGain);
        mark = focus + Vec2{1.0, 0.0};
      } else if (r == 1) {
        gain = 0.8 * lambda, mark = focus + 2.5 * Vec2{std::cos(kSpread), std::sin(kSpread)};
      } else if (r == 2) {
        gain = 0.6 * lambda, mark = focus + 2.5 * Vec2{std::cos(kSpread), -std::sin(kSpread)};
      } else {
        double best = 1e300;
        for (int s = 1; s < kTeamSize; ++s) {
          const Vec2 p = to_attack(attack, agents_[index_of(attack, s)].pos);
          const double d = distance(p, zonal);
          if (d < best) best = d, mark = p + Vec2{2.0, 0.0};
        }
      }
      double w = std::clamp(1.25 * gain, 0.0, 1.0);
      if (script_ && live && r < 3) {
        // Scripted presses close the three nearest defenders in on the
        // carrier's front, standing off further as the intensity drops.
        const double turn = r == 0 ? 0.0 : r == 1 ? kSpread : -kSpread;
        const double standoff = 1.0 + 10.0 * (1.0 - lambda) + (r == 0 ? 0.0 : 1.0);
        const Vec2 face = dir_world(attack, facing_unit());
        mark = focus + standoff * Vec2{face.x * std::cos(turn) - face.y * std::sin(turn),
                                       face.x * std::sin(turn) + face.y * std::cos(turn)};
        w = 1.0;
      } else if (script_ && live) {
        w = std::clamp(lambda, 0.0, 1.0);  // the rest of the block tightens its marking
      }
      targets[i] = to_world(attack, zonal + w * (mark - zonal));
    }
    return targets;
  }

  void move() {
    const bool live = phase_ != Phase::stoppage;
    const int attack = live ? team_ : restart_team_;
    const std::vector<Vec2> targets = this->targets();
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      Agent& a = agents_[i];
      const bool attacking = a.team == attack;
      const double max_speed = attacking ? config_.attacker_max_speed : config_.defender_max_speed;
      Vec2 desired;
      if (live && static_cast<int>(i) == carrier_ && phase_ == Phase::hold) {
        desired = dir_world(team_, drift_);
      } else if (phase_ == Phase::pass && static_cast<int>(i) == receiver_) {
        desired = cap((pass_to_ - a.pos) * (1.0 / 0.3), max_speed);
      } else {
        desired = cap((targets[i] - a.pos) * (1.0 / 0.5), max_speed);
      }
      a.vel = cap(a.vel + (desired - a.vel) * std::min(1.0, kDt / 0.25), max_speed);
      const Vec2 next = clamp_pitch(a.pos + a.vel * kDt);
      a.vel = (next - a.pos) * kNominalFrameRate;
      a.pos = next;
    }

    const Vec2 old_ball = ball_;
    if (phase_ == Phase::hold) {
      ball_ = clamp_pitch(agents_[carrier_].pos + 0.3 * facing_unit());
    } else if (phase_ == Phase::pass) {
      const double u = std::min(1.0, static_cast<double>(frame_ + 1 - pass_start_) /
                                         static_cast<double>(pass_arrival_ - pass_start_));
      ball_ = pass_from_ + u * (pass_to_ - pass_from_);
    } else {
      ball_ = clamp_pitch(ball_ + ball_vel_ * kDt);
    }
    ball_vel_ = phase_ == Phase::stoppage && frame_ + 1 >= restart_frame_ ? Vec2{} : (ball_ - old_ball) * kNominalFrameRate;
  }

  SynthConfig config_;
  Rng rng_;
  std::string match_id_;
  std::vector<Agent> agents_;
  std::optional<PressScript> script_;
  bool record_ = true;

  std::int64_t frame_ = 0;
  Phase phase_ = Phase::hold;
  int team_ = 0;
  int carrier_ = 0;
  int target_ = 0;
  int receiver_ = 0;
  bool dribble_ = false;
  Vec2 drift_;
  std::int64_t hold_start_ = 0;
  std::int64_t hold_end_ = 0;
  std::int64_t poss_start_ = 0;
  std::int64_t planned_end_ = 0;
  double lambda_ = 0.0;
  bool direct_ = true;
  bool committed_ = false;
  Vec2 pass_from_, pass_to_;
  std::int64_t pass_start_ = 0, pass_arrival_ = 0;
  std::int64_t restart_frame_ = 0;
  int restart_team_ = 0;
  Vec2 ball_, ball_vel_;
  int losses_ = 0;

  std::vector<Frame> frames_;
  std::vector<Event> events_;
  std::vector<OrientationRecord> orientations_;
  std::vector<PossessionLog> log_;
};

}  // namespace

SynthMatch simulate_match(const SynthConfig& config, std::string match_id) {
  Simulator sim(config, std::move(match_id));
  const auto frames = static_cast<std::int64_t>(std::llround(config.duration_seconds * kNominalFrameRate));
  while (sim.frame() < frames) sim.step();
  sim.finish();
  return std::move(sim).result();
}

SynthMatch simulate_scripted_press(const SynthConfig& config, const PressScript& script, std::string match_id) {
  if (script.points.size() < 2) throw ValidationError("press script needs at least two points");
  for (std::size_t i = 0; i < script.points.size(); ++i) {
    const auto [t, l] = script.points[i];
    if (!(l >= 0.0 && l <= 1.0)) throw ValidationError("scripted press intensity must lie in [0, 1]");
    if (i > 0 && !(t > script.points[i - 1].first)) throw ValidationError("press script times must increase");
  }
  SynthConfig c = config;
  c.press_mix.clear();
  c.press_intensity = 0.0;
  Simulator sim(c, std::move(match_id));
  sim.set_script(script);
  const auto frames = static_cast<std::int64_t>(std::llround((script.duration() + 2.0) * kNominalFrameRate));
  while (sim.frame() < frames) sim.step();
  sim.finish();
  return std::move(sim).result();
}

OracleEstimate oracle_loss_probability(const SynthConfig& config, std::int64_t frame, std::size_t rollouts,
                                       std::uint64_t rollout_seed, double horizon_seconds) {
  if (rollouts == 0) throw ValidationError("oracle needs at least one rollout");
  Simulator base(config, "oracle");
  base.set_recording(false);
  while (base.frame() < frame) base.step();
  OracleEstimate est;
  est.rollouts = rollouts;
  if (!base.in_possession()) return est;
  const auto horizon = static_cast<std::int64_t>(std::llround(horizon_seconds * kNominalFrameRate));
  std::size_t lost = 0;
  for (std::size_t i = 0; i < rollouts; ++i) {
    Simulator sim = base;
    sim.reseed(Rng::mix(rollout_seed, i));
    for (std::int64_t k = 0; k < horizon && sim.losses() == base.losses() && sim.in_possession(); ++k) sim.step();
    lost += sim.losses() > base.losses();
  }
  const double n = static_cast<double>(rollouts);
  est.probability = static_cast<double>(lost) / n;
  est.standard_error = std::sqrt(est.probability * (1.0 - est.probability) / n);
  return est;
}

void write_synth_match(const std::filesystem::path& dir, const SynthMatch& match) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / kTrackingFile);
    write_tracking(out, match.data.tracking);
  }
  {
    std::ofstream out(dir / kEventsFile);
    write_events(out, match.data.events);
  }
  {
    std::ofstream out(dir / kOrientationsFile);
    write_orientations(out, match.data.orientations);
  }
  const auto& c = match.config;
  nlohmann::ordered_json j;
  j["match_id"] = match.data.match_id;
  j["config"] = {{"seed", c.seed},
                 {"duration_seconds", c.duration_seconds},
                 {"press_intensity", c.press_intensity},
                 {"press_mix", c.press_mix},
                 {"orientation_effect", c.orientation_effect},
                 {"pass_rate", c.pass_rate},
                 {"pitch", {{"length", c.pitch.length}, {"width", c.pitch.width}}},
                 {"attacker_max_speed", c.attacker_max_speed},
                 {"defender_max_speed", c.defender_max_speed},
                 {"min_possession_seconds", c.min_possession_seconds},
                 {"max_possession_seconds", c.max_possession_seconds},
                 {"grace_seconds", c.grace_seconds},
                 {"press_ramp_seconds", c.press_ramp_seconds},
                 {"pressed_hold_factor", c.pressed_hold_factor},
                 {"direct_share", c.direct_share},
                 {"style_bias", c.style_bias}};
  if (c.hazard_override) j["config"]["hazard_override"] = *c.hazard_override;
  j["calibration"] = {{"hazard", "sigmoid(c0 + c1*mean_pressure + beta*front_pressure)"},
                      {"c0", c.hazard_c0},
                      {"c1", c.hazard_c1},
                      {"beta", c.orientation_effect}};
  std::vector<double> lambdas = c.press_mix.empty() ? std::vector<double>{c.press_intensity} : c.press_mix;
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  auto rates = nlohmann::ordered_json::array();
  for (double l : lambdas) rates.push_back({{"press_intensity", l}, {"loss_rate", match.loss_rate(l)}});
  j["empirical_loss_rate"] = rates;
  auto log = nlohmann::ordered_json::array();
  for (const auto& p : match.possessions) {
    log.push_back({{"index", p.index},
                   {"team", p.team},
                   {"start_frame", p.start_frame},
                   {"end_frame", p.end_frame},
                   {"press_intensity", p.press_intensity},
                   {"style", p.style},
                   {"outcome", p.outcome}});
  }
  j["possessions"] = log;
  std::ofstream out(dir / kSynthManifestFile);
  out << j.dump(2) << '\n';
}

}  // namespace pressmap
