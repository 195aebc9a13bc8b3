#include "pressmap/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "pressmap/error.hpp"
#include "pressmap/parallel.hpp"
#include "pressmap/text.hpp"

namespace pressmap {

void WindowSpec::validate() const {
  if (!(frame_rate_hz > 0.0) || !(window_seconds > 0.0)) throw ValidationError("window length and frame rate must be positive");
  if (frames_per_window != std::llround(window_seconds * frame_rate_hz)) {
    throw ValidationError("frames_per_window must equal window_seconds x frame rate");
  }
  if (!(stride_seconds > 0.0)) throw ValidationError("window stride must be positive");
  if (!(horizon_seconds > 0.0)) throw ValidationError("horizon must be positive");
  if (!(min_possession_seconds >= 0.0)) throw ValidationError("minimum possession length must be non-negative");
}

int WindowSpec::horizon_frames() const { return static_cast<int>(std::llround(horizon_seconds * frame_rate_hz)); }

std::int64_t WindowSpec::stride_offset(int i) const { return std::llround(i * stride_seconds * frame_rate_hz); }

namespace {

struct Touch {
  std::int64_t frame = 0;
  std::string team;
  bool stoppage = false;
};

// On-ball touches and stoppages in time order, with contested tackles removed.
std::vector<Touch> touches_of(const std::vector<Event>& events) {
  std::vector<const Event*> sorted;
  for (const auto& e : events) sorted.push_back(&e);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Event* a, const Event* b) { return a->start_frame < b->start_frame; });

  std::vector<Touch> out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Event& e = *sorted[i];
    if (!e.on_ball()) {
      out.push_back({e.start_frame, {}, true});
      continue;
    }
    if (e.kind == EventKind::tackle) {
      const Event* next = nullptr;
      for (std::size_t j = i + 1; j < sorted.size(); ++j) {
        if (sorted[j]->on_ball() && sorted[j]->kind != EventKind::tackle) {
          next = sorted[j];
          break;
        }
        if (!sorted[j]->on_ball()) break;
      }
      if (!next || next->team != e.team) continue;
    }
    out.push_back({e.start_frame, e.team, false});
  }
  return out;
}

}  // namespace

std::vector<Possession> segment_all_possessions(const std::vector<Event>& events, const TrackingSequence& tracking) {
  if (events.empty()) throw ValidationError("cannot segment possessions: empty event list");
  const double rate = tracking.frame_rate_hz > 0.0 ? tracking.frame_rate_hz : kNominalFrameRate;
  std::int64_t last_frame = 0;
  for (const auto& e : events) last_frame = std::max(last_frame, e.end_frame);
  if (!tracking.frames.empty()) last_frame = tracking.frames.back().frame_index;

  std::vector<Possession> out;
  std::optional<Possession> open;
  auto close = [&](std::int64_t end, PossessionEnd reason) {
    if (!open) return;
    open->end_frame = std::min(end, last_frame);
    open->end_reason = reason;
    if (open->end_frame >= open->start_frame) {
      open->duration = static_cast<double>(open->end_frame - open->start_frame) / rate;
      open->id = static_cast<int>(out.size());
      out.push_back(*open);
    }
    open.reset();
  };

  for (const auto& t : touches_of(events)) {
    if (t.stoppage) {
      close(t.frame - 1, PossessionEnd::stoppage);
      continue;
    }
    if (open && open->team == t.team) continue;
    close(t.frame - 1, PossessionEnd::turnover);
    Possession p;
    p.team = t.team;
    p.start_frame = t.frame;
    open = p;
  }
  close(last_frame, PossessionEnd::end_of_data);
  return out;
}

std::vector<Possession> segment_possessions(const std::vector<Event>& events, const TrackingSequence& tracking,
                                            double min_seconds) {
  auto all = segment_all_possessions(events, tracking);
  std::erase_if(all, [&](const Possession& p) { return !(p.duration > min_seconds); });
  return all;
}

std::vector<Window> window_grid(const Possession& possession, const WindowSpec& spec) {
  std::vector<Window> out;
  for (int i = 0;; ++i) {
    const std::int64_t start = possession.start_frame + spec.stride_offset(i);
    const std::int64_t end = start + spec.frames_per_window - 1;
    if (end > possession.end_frame) break;
    out.push_back({start, end, kLabelKeep});
  }
  return out;
}

std::vector<Window> make_windows(const Possession& possession, const TrackingSequence& tracking,
                                 const WindowSpec& spec) {
  spec.validate();
  std::vector<Window> out;
  if (!(possession.duration > spec.min_possession_seconds)) return out;
  const std::int64_t horizon = spec.horizon_frames();
  for (Window w : window_grid(possession, spec)) {
    if (!tracking.position_of(w.start_frame) || !tracking.position_of(w.end_frame)) continue;
    if (w.end_frame + horizon <= possession.end_frame) {
      w.label = kLabelKeep;
    } else if (possession.end_reason == PossessionEnd::turnover) {
      w.label = kLabelLose;
    } else {
      continue;  // stoppage or end of data: outcome unknown
    }
    out.push_back(w);
  }
  return out;
}

MatchContext::MatchContext(MatchData match, FeatureConfig features)
    : match_(std::move(match)), features_(std::move(features)) {
  features_.control.validate();
  features_.amplifier.validate();
  resample(match_.tracking, match_.events, match_.orientations, kNominalFrameRate);
  if (!match_.tracking.contiguous()) {
    throw ValidationError("match " + match_.match_id + ": tracking frame indices must be contiguous");
  }
  match_.tracking = derive_velocities(std::move(match_.tracking));
  infer_ball_owners(match_.tracking);
  orientations_ = OrientationIndex(match_.orientations);
  possessions_ = segment_all_possessions(match_.events, match_.tracking);
}

const Frame& MatchContext::frame(std::int64_t frame_index) const {
  auto pos = match_.tracking.position_of(frame_index);
  if (!pos) throw ValidationError("frame " + std::to_string(frame_index) + " not in tracking data");
  return match_.tracking.frames[*pos];
}

const Possession* MatchContext::possession_containing(std::int64_t frame_index) const {
  for (const auto& p : possessions_) {
    if (p.contains(frame_index)) return &p;
  }
  return nullptr;
}

const Possession& MatchContext::possession(int id) const {
  for (const auto& p : possessions_) {
    if (p.id == id) return p;
  }
  throw ValidationError("unknown possession " + std::to_string(id));
}

Frame MatchContext::oriented_frame(std::int64_t frame_index, std::string_view team) const {
  const Frame& f = frame(frame_index);
  return attack_sign(team) < 0 ? mirrored(f, pitch()) : f;
}

std::optional<OrientationEstimate> MatchContext::orientation(std::int64_t frame_index, std::string_view team,
                                                             std::string_view player_id) const {
  auto est = orientation_for(frame(frame_index), player_id, orientations_);
  if (est && attack_sign(team) < 0) est->theta = wrap_angle(est->theta + std::numbers::pi);
  return est;
}

PressureMap MatchContext::pressures(std::int64_t frame_index, std::string_view team, PpmVariant variant) const {
  PressureMap out;
  if (variant == PpmVariant::tracking) return out;
  const Frame f = oriented_frame(frame_index, team);
  const Sides sides = split_sides(f, team);
  const auto identity = PressureAmplifier::identity();
  for (const auto& p : f.players) {
    if (p.team != team) continue;
    PressureVector v = sample_pressure_at(sides, p.position, features_.control, features_.radius);
    if (variant == PpmVariant::ppm3d) {
      const auto est = orientation(frame_index, team, p.player_id);
      v = est ? apply_amplifier(v, est->theta, features_.amplifier) : apply_amplifier(v, 0.0, identity);
    }
    out.emplace(p.player_id, v);
  }
  if (f.ball) {
    PressureVector v = sample_pressure_at(sides, f.ball->position, features_.control, features_.radius);
    if (variant == PpmVariant::ppm3d) v = apply_amplifier(v, 0.0, identity);
    out.emplace(std::string(kBallId), v);
  }
  return out;
}

PpmGraph MatchContext::graph(std::int64_t frame_index, std::string_view team, PpmVariant variant) const {
  return build_ppm(oriented_frame(frame_index, team), team, pressures(frame_index, team, variant), variant, pitch());
}

PpmSequence MatchContext::sequence(const Possession& possession, std::int64_t start_frame, PpmVariant variant) const {
  std::vector<Frame> frames;
  std::vector<PressureMap> pressure_maps;
  for (std::int64_t f = start_frame; f < start_frame + kFramesPerWindow; ++f) {
    if (!possession.contains(f)) {
      throw ValidationError("window starting at frame " + std::to_string(start_frame) +
                            " crosses the boundary of possession " + std::to_string(possession.id));
    }
    frames.push_back(oriented_frame(f, possession.team));
    if (variant != PpmVariant::tracking) pressure_maps.push_back(pressures(f, possession.team, variant));
  }
  PpmSequence seq = build_sequence(frames, possession, pressure_maps, variant, pitch());
  seq.match_id = match_id();
  return seq;
}

PpmSequence Dataset::sequence(std::size_t i) const {
  const ManifestRow& row = manifest.at(i);
  const auto& frames = graphs.at(row.match_id);
  PpmSequence seq;
  seq.match_id = row.match_id;
  seq.possession_id = row.possession_id;
  seq.window_start_frame = row.window_start_frame;
  seq.label = row.label;
  seq.graphs.reserve(kFramesPerWindow);
  for (std::int64_t f = row.window_start_frame; f < row.window_start_frame + kFramesPerWindow; ++f) {
    auto it = frames.find(f);
    if (it == frames.end()) {
      throw ValidationError("dataset is missing the graph of frame " + std::to_string(f) + " in match " + row.match_id);
    }
    seq.graphs.push_back(it->second);
  }
  return seq;
}

std::vector<std::string> Dataset::match_ids() const {
  std::vector<std::string> ids;
  for (const auto& s : summaries) ids.push_back(s.match_id);
  if (ids.empty()) {
    for (const auto& [id, g] : graphs) ids.push_back(id);
  }
  return ids;
}

namespace {

Dataset build_match_dataset(const MatchData& match, const WindowSpec& spec, PpmVariant variant,
                            const FeatureConfig& features) {
  Dataset ds;
  ds.variant = variant;
  MatchContext ctx(match, features);
  MatchSummary summary;
  summary.match_id = ctx.match_id();
  auto& graphs = ds.graphs[ctx.match_id()];
  std::set<std::int64_t> failed;

  for (const auto& poss : ctx.possessions()) {
    if (!(poss.duration > spec.min_possession_seconds)) continue;
    ++summary.possessions;
    for (const auto& w : make_windows(poss, ctx.tracking(), spec)) {
      bool ok = true;
      for (std::int64_t f = w.start_frame; f <= w.end_frame && ok; ++f) {
        if (failed.count(f)) {
          ok = false;
        } else if (!graphs.count(f)) {
          try {
            graphs.emplace(f, ctx.graph(f, poss.team, variant));
          } catch (const ValidationError& e) {
            failed.insert(f);
            ds.warnings.push_back("match " + ctx.match_id() + ": " + e.what());
            ok = false;
          }
        }
      }
      if (!ok) {
        ++summary.skipped_windows;
        continue;
      }
      ds.manifest.push_back({ctx.match_id(), poss.id, w.start_frame, w.label, variant});
      ++summary.windows;
      (w.label == kLabelKeep ? summary.keep : summary.lose) += 1;
    }
  }
  if (summary.possessions == 0) ds.warnings.push_back("match " + ctx.match_id() + ": no qualifying possessions");
  if (summary.skipped_windows > 0) {
    ds.warnings.push_back("match " + ctx.match_id() + ": skipped " + std::to_string(summary.skipped_windows) +
                          " windows with frames that cannot form a PPM");
  }
  ds.summaries.push_back(summary);
  return ds;
}

}  // namespace

Dataset build_dataset(std::span<const MatchData> matches, const WindowSpec& spec, PpmVariant variant,
                      const FeatureConfig& features, unsigned jobs) {
  if (matches.empty()) throw ValidationError("build_dataset needs at least one match");
  spec.validate();
  std::set<std::string> ids;
  for (const auto& m : matches) {
    if (!ids.insert(m.match_id).second) throw ValidationError("duplicate match id " + m.match_id);
  }
  std::vector<Dataset> parts(matches.size());
  parallel_for(matches.size(), jobs,
               [&](std::size_t i) { parts[i] = build_match_dataset(matches[i], spec, variant, features); });

  Dataset out;
  out.variant = variant;
  for (auto& part : parts) {
    out.manifest.insert(out.manifest.end(), part.manifest.begin(), part.manifest.end());
    for (auto& [id, g] : part.graphs) out.graphs[id] = std::move(g);
    out.summaries.insert(out.summaries.end(), part.summaries.begin(), part.summaries.end());
    out.warnings.insert(out.warnings.end(), part.warnings.begin(), part.warnings.end());
  }
  return out;
}

std::vector<Example> to_examples(const Dataset& dataset) {
  std::vector<Example> out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& row = dataset.manifest[i];
    out.push_back({pack(dataset.sequence(i)), row.label, row.match_id + ":" + std::to_string(row.possession_id)});
  }
  return out;
}

std::pair<Dataset, Dataset> split_by_match(const Dataset& dataset, const std::vector<std::string>& test_match_ids) {
  const auto known = dataset.match_ids();
  std::set<std::string> test(test_match_ids.begin(), test_match_ids.end());
  for (const auto& id : test) {
    if (std::find(known.begin(), known.end(), id) == known.end()) throw ValidationError("unknown match id " + id);
  }
  Dataset train_set, test_set;
  train_set.variant = test_set.variant = dataset.variant;
  for (const auto& row : dataset.manifest) (test.count(row.match_id) ? test_set : train_set).manifest.push_back(row);
  for (const auto& [id, g] : dataset.graphs) (test.count(id) ? test_set : train_set).graphs[id] = g;
  for (const auto& s : dataset.summaries) (test.count(s.match_id) ? test_set : train_set).summaries.push_back(s);
  if (train_set.manifest.empty()) throw ValidationError("empty training set");
  if (test_set.manifest.empty()) throw ValidationError("empty test set");
  return {std::move(train_set), std::move(test_set)};
}

void write_manifest(std::ostream& out, const std::vector<ManifestRow>& rows) {
  out << "match_id,possession_id,window_start_frame,label,variant\n";
  for (const auto& r : rows) {
    out << r.match_id << ',' << r.possession_id << ',' << r.window_start_frame << ',' << r.label << ','
        << to_string(r.variant) << '\n';
  }
}

std::vector<ManifestRow> parse_manifest(std::istream& in) {
  std::string line;
  if (!text::read_line(in, line) || text::trim(line) != "match_id,possession_id,window_start_frame,label,variant") {
    throw ValidationError("manifest: unexpected header");
  }
  std::vector<ManifestRow> rows;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line);
    if (f.size() != 5) throw ValidationError("manifest line " + std::to_string(line_no) + ": expected 5 fields");
    auto poss = text::parse_int(f[1]);
    auto start = text::parse_int(f[2]);
    auto label = text::parse_int(f[3]);
    auto variant = parse_ppm_variant(text::trim(f[4]));
    if (!poss || !start || !label || (*label != 0 && *label != 1) || !variant) {
      throw ValidationError("manifest line " + std::to_string(line_no) + ": malformed row");
    }
    rows.push_back({std::string(text::trim(f[0])), static_cast<int>(*poss), *start, static_cast<int>(*label), *variant});
  }
  return rows;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / kManifestFile);
    write_manifest(out, dataset.manifest);
  }
  for (const auto& [id, graphs] : dataset.graphs) {
    std::ofstream out(dir / ("graphs_" + id + ".ppm"));
    for (const auto& [frame, g] : graphs) write_ppm_line(out, g);
  }
}

Dataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / kManifestFile);
  if (!in) throw ValidationError("dataset manifest not found in " + dir.string());
  Dataset ds;
  ds.manifest = parse_manifest(in);
  if (!ds.manifest.empty()) ds.variant = ds.manifest.front().variant;
  std::set<std::string> ids;
  for (const auto& r : ds.manifest) {
    if (r.variant != ds.variant) throw ValidationError("manifest mixes variants");
    ids.insert(r.match_id);
  }
  for (const auto& id : ids) {
    std::ifstream g(dir / ("graphs_" + id + ".ppm"));
    if (!g) throw ValidationError("missing graph dump for match " + id);
    auto& frames = ds.graphs[id];
    std::string line;
    while (text::read_line(g, line)) {
      if (text::trim(line).empty()) continue;
      PpmGraph graph = parse_ppm_line(line);
      frames.emplace(graph.frame_index, std::move(graph));
    }
    MatchSummary s;
    s.match_id = id;
    for (const auto& r : ds.manifest) {
      if (r.match_id != id) continue;
      ++s.windows;
      (r.label == kLabelKeep ? s.keep : s.lose) += 1;
    }
    ds.summaries.push_back(s);
  }
  return ds;
}

}  // namespace pressmap
