#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pressmap/datamodel.hpp"
#include "pressmap/pitch_control.hpp"
#include "pressmap/ppm_graph.hpp"
#include "pressmap/pressure.hpp"
#include "pressmap/trainer.hpp"

namespace pressmap {

struct WindowSpec {
  double window_seconds = 2.0;
  int frames_per_window = kFramesPerWindow;
  double stride_seconds = 0.5;
  double horizon_seconds = 4.0;
  double min_possession_seconds = 5.0;
  double frame_rate_hz = kNominalFrameRate;

  /// Throws ValidationError unless frames_per_window = window_seconds × rate
  /// and stride and horizon are positive.
  void validate() const;
  int horizon_frames() const;
  /// Frame offset of the i-th window from the possession start.
  std::int64_t stride_offset(int i) const;
};

/// Every possession in the match, including short ones.
///
/// A possession is a maximal run of on-ball events by one team. It ends the
/// frame before the opponent's first on-ball event (turnover), the frame
/// before a stoppage (`other` event), or at the last tracking frame. A
/// tackle only counts when the tackling team also makes the next on-ball
/// event. Throws ValidationError on an empty event list.
std::vector<Possession> segment_all_possessions(const std::vector<Event>& events, const TrackingSequence& tracking);

/// Possessions lasting strictly longer than `min_seconds`.
std::vector<Possession> segment_possessions(const std::vector<Event>& events, const TrackingSequence& tracking,
                                            double min_seconds = 5.0);

struct Window {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;  // inclusive
  int label = kLabelKeep;
};

/// Window positions inside a possession, without labels.
std::vector<Window> window_grid(const Possession& possession, const WindowSpec& spec);

/// Labelled windows of a qualifying possession: label 1 when the possession
/// still holds `horizon` after the window end, 0 when it was lost to the
/// opponent before then. Windows whose outcome is unknown (stoppage or end
/// of data inside the horizon) are dropped, as are all windows of a
/// possession not longer than the minimum duration.
std::vector<Window> make_windows(const Possession& possession, const TrackingSequence& tracking,
                                 const WindowSpec& spec);

struct FeatureConfig {
  ControlParams control;
  PressureAmplifier amplifier = PressureAmplifier::defaults();
  double radius = kPressureRadius;
};

/// A match prepared for feature extraction: resampled to 25 Hz, velocities
/// derived, ball owners inferred, possessions segmented.
class MatchContext {
 public:
  explicit MatchContext(MatchData match, FeatureConfig features = {});

  const std::string& match_id() const { return match_.match_id; }
  const TrackingSequence& tracking() const { return match_.tracking; }
  const std::vector<Event>& events() const { return match_.events; }
  const std::vector<OrientationRecord>& orientation_records() const { return match_.orientations; }
  const std::vector<Possession>& possessions() const { return possessions_; }
  const FeatureConfig& features() const { return features_; }
  const PitchSpec& pitch() const { return match_.tracking.pitch; }

  const Frame& frame(std::int64_t frame_index) const;
  const Possession* possession_containing(std::int64_t frame_index) const;
  const Possession& possession(int id) const;

  /// The frame rotated, if needed, so that `team` attacks toward +x.
  Frame oriented_frame(std::int64_t frame_index, std::string_view team) const;

  /// Orientation of a player in the coordinates of oriented_frame().
  std::optional<OrientationEstimate> orientation(std::int64_t frame_index, std::string_view team,
                                                 std::string_view player_id) const;

  /// Pressure vectors of the 11 attackers and the ball for `variant`.
  PressureMap pressures(std::int64_t frame_index, std::string_view team, PpmVariant variant) const;

  PpmGraph graph(std::int64_t frame_index, std::string_view team, PpmVariant variant) const;

  /// Sequence of the 50 frames starting at `start_frame`, inside `possession`.
  PpmSequence sequence(const Possession& possession, std::int64_t start_frame, PpmVariant variant) const;

 private:
  MatchData match_;
  FeatureConfig features_;
  OrientationIndex orientations_;
  std::vector<Possession> possessions_;
};

struct ManifestRow {
  std::string match_id;
  int possession_id = 0;
  std::int64_t window_start_frame = 0;
  int label = kLabelKeep;
  PpmVariant variant = PpmVariant::tracking;
};

struct MatchSummary {
  std::string match_id;
  std::size_t possessions = 0;
  std::size_t windows = 0;
  std::size_t keep = 0;
  std::size_t lose = 0;
  std::size_t skipped_windows = 0;
};

/// Labelled PPM windows of one or more matches. Graphs are stored once per
/// frame and shared by overlapping windows.
struct Dataset {
  PpmVariant variant = PpmVariant::tracking;
  std::vector<ManifestRow> manifest;
  std::map<std::string, std::map<std::int64_t, PpmGraph>> graphs;
  std::vector<MatchSummary> summaries;
  std::vector<std::string> warnings;

  std::size_t size() const { return manifest.size(); }
  PpmSequence sequence(std::size_t i) const;
  std::vector<std::string> match_ids() const;
};

/// Runs segmentation, windowing, pressure extraction and PPM construction
/// over all matches. Windows touching a frame that cannot form a PPM are
/// skipped and counted. Matches are processed on up to `jobs` threads; the
/// result is ordered by (match, possession start, window start).
Dataset build_dataset(std::span<const MatchData> matches, const WindowSpec& spec, PpmVariant variant,
                      const FeatureConfig& features = {}, unsigned jobs = 1);

/// Packs every window for the trainer; examples are grouped by possession.
std::vector<Example> to_examples(const Dataset& dataset);

/// Train/test split by whole matches. Throws ValidationError on unknown ids
/// or if either side would be empty.
std::pair<Dataset, Dataset> split_by_match(const Dataset& dataset, const std::vector<std::string>& test_match_ids);

/// CSV `match_id,possession_id,window_start_frame,label,variant`.
void write_manifest(std::ostream& out, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> parse_manifest(std::istream& in);

inline constexpr std::string_view kManifestFile = "manifest.csv";

/// manifest.csv plus one PPM dump per match (graphs_<match>.ppm).
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& dir);

}  // namespace pressmap
