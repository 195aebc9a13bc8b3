#include "pressmap/analytics.hpp"

#include <algorithm>
#include <tuple>

#include "pressmap/error.hpp"
#include "pressmap/text.hpp"
#include "pressmap/trainer.hpp"

namespace pressmap {

std::string_view to_string(PositionGroup group) {
  switch (group) {
    case PositionGroup::defender: return "defender";
    case PositionGroup::midfielder: return "midfielder";
    case PositionGroup::attacker: return "attacker";
  }
  return "defender";
}

std::optional<PositionGroup> parse_position_group(std::string_view token) {
  for (auto g : {PositionGroup::defender, PositionGroup::midfielder, PositionGroup::attacker}) {
    if (token == to_string(g)) return g;
  }
  return std::nullopt;
}

Roster parse_roster(std::istream& in) {
  std::string line;
  if (!text::read_line(in, line) || text::trim(line) != "player_id,position_group") {
    throw ValidationError("roster: expected header player_id,position_group");
  }
  Roster roster;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line);
    const auto group = f.size() == 2 ? parse_position_group(text::trim(f[1])) : std::nullopt;
    if (!group) throw ValidationError("roster line " + std::to_string(line_no) + ": malformed row");
    if (!roster.emplace(std::string(text::trim(f[0])), *group).second) {
      throw ValidationError("roster line " + std::to_string(line_no) + ": duplicate player");
    }
  }
  return roster;
}

PassAccuracyReport passing_accuracy_by_level(const std::vector<Event>& events,
                                             const std::map<std::string, double>& pressure_by_event,
                                             const Roster* roster, std::size_t min_attempts) {
  using Key = std::pair<std::string, int>;
  std::map<Key, std::pair<std::size_t, std::size_t>> players, groups;
  PassAccuracyReport report;
  for (const auto& e : events) {
    if (e.kind != EventKind::pass) continue;
    auto it = pressure_by_event.find(e.event_id);
    if (it == pressure_by_event.end()) {
      report.skipped.push_back(e.event_id + ": no pressure for the passer at the pass start");
      continue;
    }
    const int level = static_cast<int>(pressure_level(it->second));
    const bool ok = e.outcome == Outcome::success;
    auto& p = players[{e.player_id, level}];
    ++p.first;
    p.second += ok;
    if (roster) {
      auto g = roster->find(e.player_id);
      if (g != roster->end()) {
        auto& c = groups[{std::string(to_string(g->second)), level}];
        ++c.first;
        c.second += ok;
      }
    }
  }
  auto emit = [&](const auto& table, bool is_group) {
    for (const auto& [key, counts] : table) {
      PassAccuracyRow row;
      row.subject = key.first;
      row.is_group = is_group;
      row.level = static_cast<PressureLevel>(key.second);
      row.attempts = counts.first;
      row.successes = counts.second;
      row.accuracy = static_cast<double>(counts.second) / static_cast<double>(counts.first);
      row.low_sample = counts.first < min_attempts;
      report.rows.push_back(row);
    }
  };
  emit(players, false);
  emit(groups, true);
  return report;
}

std::map<std::string, double> pass_pressures(const MatchContext& ctx) {
  std::map<std::string, double> out;
  const auto& features = ctx.features();
  for (const auto& e : ctx.events()) {
    if (e.kind != EventKind::pass) continue;
    const Possession* poss = ctx.possession_containing(e.start_frame);
    if (!poss || poss->team != e.team) continue;
    const Frame f = ctx.oriented_frame(e.start_frame, e.team);
    if (!f.find(e.player_id)) continue;
    PressureVector v = sample_pressure_circle(f, e.team, e.player_id, features.control, features.radius);
    if (auto est = ctx.orientation(e.start_frame, e.team, e.player_id)) {
      v = apply_amplifier(v, est->theta, features.amplifier);
    }
    out[e.event_id] = scalar_pressure(v);
  }
  return out;
}

std::vector<AmplifierSample> pass_amplifier_samples(const MatchContext& ctx) {
  std::vector<AmplifierSample> out;
  const auto& features = ctx.features();
  for (const auto& e : ctx.events()) {
    if (e.kind != EventKind::pass) continue;
    const Possession* poss = ctx.possession_containing(e.start_frame);
    if (!poss || poss->team != e.team) continue;
    const Frame f = ctx.oriented_frame(e.start_frame, e.team);
    if (!f.find(e.player_id)) continue;
    auto est = ctx.orientation(e.start_frame, e.team, e.player_id);
    if (!est) continue;
    out.push_back({sample_pressure_circle(f, e.team, e.player_id, features.control, features.radius), est->theta,
                   e.outcome});
  }
  return out;
}

namespace {

double window_pressure(const PopModel& model, const MatchContext& ctx, const Possession& poss, std::int64_t end_frame) {
  return predict_pop(model, ctx.sequence(poss, end_frame - kFramesPerWindow + 1, model.variant())).team_pressure;
}

}  // namespace

PressureSeries team_pressure_series(const PopModel& model, const MatchContext& ctx, const Possession& possession,
                                    const WindowSpec& spec) {
  spec.validate();
  const auto windows = window_grid(possession, spec);
  if (windows.empty()) {
    throw ValidationError("possession " + std::to_string(possession.id) + " is shorter than one window");
  }
  PressureSeries series;
  series.possession_id = possession.id;
  for (const auto& w : windows) {
    series.samples.push_back(
        {w.end_frame, ctx.frame(w.end_frame).timestamp, window_pressure(model, ctx, possession, w.end_frame)});
  }
  return series;
}

DeltaResult event_pressure_delta(const PopModel& model, const MatchContext& ctx, const Event& event) {
  if (event.kind != EventKind::pass && event.kind != EventKind::dribble) return {std::nullopt, "not a pass or dribble"};
  const Possession* poss = ctx.possession_containing(event.start_frame);
  if (!poss) return {std::nullopt, "event starts outside active play"};
  if (poss->team != event.team) return {std::nullopt, "event team is not in possession"};
  if (!poss->contains(event.end_frame)) return {std::nullopt, "event ends after a possession change"};
  if (event.start_frame - kFramesPerWindow + 1 < poss->start_frame) {
    return {std::nullopt, "event starts within 2 s of the possession start"};
  }
  EventDelta d;
  d.event_id = event.event_id;
  d.kind = event.kind;
  d.player_id = event.player_id;
  d.pressure_start = window_pressure(model, ctx, *poss, event.start_frame);
  d.pressure_end =
      event.end_frame == event.start_frame ? d.pressure_start : window_pressure(model, ctx, *poss, event.end_frame);
  d.delta = d.pressure_start - d.pressure_end;
  return {d, {}};
}

std::vector<PlayerDeltaRow> player_delta_summary(const std::vector<EventDelta>& deltas) {
  std::map<std::pair<std::string, EventKind>, std::pair<double, std::size_t>> acc;
  for (const auto& d : deltas) {
    auto& a = acc[{d.player_id, d.kind}];
    a.first += d.delta;
    ++a.second;
  }
  std::vector<PlayerDeltaRow> rows;
  for (const auto& [key, a] : acc) {
    rows.push_back({key.first, key.second, a.first / static_cast<double>(a.second), a.second});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const PlayerDeltaRow& x, const PlayerDeltaRow& y) { return x.mean_delta > y.mean_delta; });
  return rows;
}

void write_pass_accuracy(std::ostream& out, const std::vector<PassAccuracyRow>& rows) {
  out << "subject,subject_type,level,attempts,successes,accuracy,low_sample\n";
  for (const auto& r : rows) {
    out << r.subject << ',' << (r.is_group ? "group" : "player") << ',' << static_cast<int>(r.level) << ','
        << r.attempts << ',' << r.successes << ',' << text::format_double(r.accuracy) << ','
        << (r.low_sample ? 1 : 0) << '\n';
  }
}

void write_pressure_series(std::ostream& out, const PressureSeries& series) {
  out << "possession_id,frame,timestamp,team_pressure\n";
  for (const auto& s : series.samples) {
    out << series.possession_id << ',' << s.frame_index << ',' << text::format_double(s.timestamp) << ','
        << text::format_double(s.team_pressure) << '\n';
  }
}

void write_event_deltas(std::ostream& out, const std::vector<EventDelta>& deltas) {
  out << "event_id,kind,player_id,pressure_start,pressure_end,delta\n";
  for (const auto& d : deltas) {
    out << d.event_id << ',' << to_string(d.kind) << ',' << d.player_id << ','
        << text::format_double(d.pressure_start) << ',' << text::format_double(d.pressure_end) << ','
        << text::format_double(d.delta) << '\n';
  }
}

void write_player_deltas(std::ostream& out, const std::vector<PlayerDeltaRow>& rows) {
  out << "player_id,kind,mean_delta,count\n";
  for (const auto& r : rows) {
    out << r.player_id << ',' << to_string(r.kind) << ',' << text::format_double(r.mean_delta) << ',' << r.count
        << '\n';
  }
}

}  // namespace pressmap
