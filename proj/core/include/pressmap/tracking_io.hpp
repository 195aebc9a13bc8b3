#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "pressmap/datamodel.hpp"

namespace pressmap {

inline constexpr std::string_view kTrackingHeader = "frame,timestamp,team,player_id,x,y,vx,vy";
inline constexpr std::string_view kEventsHeader =
    "event_id,kind,team,player_id,start_frame,end_frame,outcome,start_x,start_y,end_x,end_y";
inline constexpr std::string_view kOrientationsHeader = "frame,player_id,theta,source";

/// Parses the tracking CSV. Rows of one frame must be adjacent; frames must
/// appear in increasing index and timestamp order. Errors name the line.
TrackingSequence parse_tracking(std::istream& in, const PitchSpec& pitch = {});
void write_tracking(std::ostream& out, const TrackingSequence& seq);

/// Parses the events CSV; the result is stably sorted by start frame.
std::vector<Event> parse_events(std::istream& in);
void write_events(std::ostream& out, const std::vector<Event>& events);

/// Non-fatal cross-check of event frame references against tracking.
std::vector<std::string> check_event_frames(const std::vector<Event>& events, const TrackingSequence& seq);

/// Parses orientation records, normalizing theta into [0, 2π). When
/// `known` is given, records naming a player absent from it are rejected.
std::vector<OrientationRecord> parse_orientations(std::istream& in, const TrackingSequence* known = nullptr);
void write_orientations(std::ostream& out, const std::vector<OrientationRecord>& records);

inline constexpr std::string_view kTrackingFile = "tracking.csv";
inline constexpr std::string_view kEventsFile = "events.csv";
inline constexpr std::string_view kOrientationsFile = "orientations.csv";

/// Loads tracking.csv, events.csv and (optional) orientations.csv from one
/// match directory. The match id is the directory name.
MatchData load_match(const std::filesystem::path& dir, const PitchSpec& pitch = {});

/// A directory holding tracking.csv is one match; otherwise every
/// subdirectory holding one is loaded, sorted by name.
std::vector<MatchData> load_matches(const std::filesystem::path& dir, const PitchSpec& pitch = {});

}  // namespace pressmap
