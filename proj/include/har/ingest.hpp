#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "har/types.hpp"

namespace har::ingest {

enum class LineStatus { Ok, Malformed, IllegalActivity };

struct ParsedLine {
    LineStatus status = LineStatus::Malformed;
    Sample sample;
    std::string message;

    bool ok() const { return status == LineStatus::Ok; }
};

// Parses one `subject,activity,timestamp,x,y,z` line (optional trailing
// ';', optional surrounding whitespace). Never throws.
ParsedLine parse_line(std::string_view line);

enum class Policy { Strict, SkipAndCount };

struct IngestReport {
    std::size_t lines_read = 0;
    std::size_t lines_parsed = 0;
    std::size_t lines_skipped = 0;
    std::size_t duplicates_dropped = 0;
    std::map<TrackKey, std::size_t> samples_per_key;

    std::string to_json() const;
};

struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FileSpec {
    std::string path;
    Device device = Device::Phone;
    Sensor sensor = Sensor::Accel;
};

// Guesses device/sensor from path components ("watch", "gyro"); defaults
// to phone/accel.
FileSpec infer_file_spec(const std::string& path);

struct LoadResult {
    Dataset dataset;
    IngestReport report;
};

// Loads raw files into a Dataset: tracks grouped by key, samples sorted by
// timestamp, duplicate timestamps dropped (first kept). Timestamp unit is
// autodetected per file from magnitude (>= 1e14 ticks means nanoseconds,
// else milliseconds). Strict policy throws LoadError naming file and line.
LoadResult load_dataset(const std::vector<FileSpec>& files, Policy policy = Policy::SkipAndCount);
LoadResult load_dataset(const std::vector<std::string>& paths, Policy policy = Policy::SkipAndCount);

// Writes one `<device>_<sensor>.txt` file per (device, sensor) under dir
// (created if missing), raw line format with 6-digit fixed precision.
// Returns the paths written.
std::vector<std::string> write_dataset(const Dataset& ds, const std::string& dir);

// Writes a list of tracks to a single raw-format file.
void write_tracks(const std::vector<const Track*>& tracks, const std::string& path);

}  // namespace har::ingest
