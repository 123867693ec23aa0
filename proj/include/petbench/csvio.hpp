#pragma once

// Bit-exact CSV schemas for the input log (collection.csv) and the per-trial
// output logs (frames.csv, detections.csv, events.csv).
//
// Floats carry at most six fractional digits, never exponent notation; lines
// end with LF. Readers require the exact header and report the offending
// column and line on error.

#include <string>
#include <string_view>
#include <vector>

#include "petbench/recordreplay.hpp"

namespace petbench {

extern const std::vector<std::string> kCollectionColumns;
extern const std::vector<std::string> kFrameColumns;
extern const std::vector<std::string> kDetectionColumns;
extern const std::vector<std::string> kEventColumns;

std::string write_collection_csv(const CollectionLog& log);
/// marker_pose_at_start is not part of the file and comes back as identity.
CollectionLog read_collection_csv(std::string_view text);

std::string write_frames_csv(const std::vector<FrameLogEntry>& frames);
std::string write_detections_csv(const std::vector<FrameLogEntry>& frames);
std::string write_events_csv(const std::vector<EventRow>& events);

/// Rebuilds frame entries; detection rows are attached to their frame.
std::vector<FrameLogEntry> read_frame_csvs(std::string_view frames_csv, std::string_view detections_csv);
std::vector<EventRow> read_events_csv(std::string_view text);

/// Generic reader used by the schema readers: validates the header and
/// returns the data rows split into cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> lines;  // source line of each row
};
CsvTable read_csv(std::string_view text, const std::vector<std::string>& expected_header);

}  // namespace petbench
