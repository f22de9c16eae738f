#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "har/orientation.hpp"
#include "har/types.hpp"

namespace har::synth {

// Qualitative motion model for one activity class: gravity on +Y plus a
// class-specific oscillation and noise floor.
struct Archetype {
    char activity = 'A';
    double gravity = 9.81;
    double osc_hz = 2.0;                     // dominant movement frequency
    double osc_amp[3] = {1.5, 2.5, 1.0};     // per-axis oscillation amplitude
    double lean_x = 0.0;                     // static X offset (device tilt)
    double noise_std = 0.3;

    static Archetype for_activity(char code);
};

// Deterministic canonical Case-1 track: Y mean ~ +g, sample count
// duration * rate, millisecond ticks.
Track generate(const Archetype& a, double duration_seconds, double rate_hz,
               std::uint64_t seed);

struct ScheduleEntry {
    double start_second = 0;
    orientation::OrientationCase orientation;
};

struct CorruptionSpec {
    std::vector<ScheduleEntry> schedule;  // must start at second 0, time-ordered
    double true_rate_hz = 20.0;           // 20 or 50 in the reference defects
    double jitter_std_seconds = 0.0;
    std::uint64_t seed = 0;
};

struct ScheduleOutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-segment exact linear maps realizing each orientation case (the
// inverses of the repair's shift and swap), recorded for inversion.
struct SegmentTransform {
    std::size_t begin = 0, end = 0;
    orientation::OrientationCase orientation;
    bool swap_xy = false;
    double shift[3] = {0, 0, 0};
};

struct CorruptionRecord {
    std::vector<SegmentTransform> segments;
};

// Applies the orientation schedule to a canonical track, in place.
// Invertible: invert_orientation(track, record) restores it exactly.
CorruptionRecord corrupt_orientation(Track& track, const std::vector<ScheduleEntry>& schedule);
void invert_orientation(Track& track, const CorruptionRecord& record);

// Re-times the track to the true rate (linear interpolation of values)
// with optional timestamp jitter; timestamps stay strictly increasing.
Track retime(const Track& track, double true_rate_hz, double jitter_std_seconds,
             std::uint64_t seed);

struct Corrupted {
    Track track;
    CorruptionRecord record;
};

// corrupt = corrupt_orientation then retime. Input must be canonical 20 Hz.
Corrupted corrupt(const Track& track, const CorruptionSpec& spec);

struct DurationMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleWindow {
    std::size_t index = 0;
    double mean_diff[3] = {0, 0, 0};  // repaired - original, per axis
    bool case_agrees = false;         // detected labels match
};

struct OracleReport {
    std::vector<OracleWindow> windows;
    double max_abs_mean_diff = 0;
    double case_agreement = 0;  // fraction of windows with matching labels
    bool pass = false;

    std::string to_csv() const;
};

// Compares repaired against original per window (default 10 s at 20 Hz):
// per-axis mean differences and detected-case label agreement. Pass iff
// every mean difference is within tolerance (m/s^2).
OracleReport oracle_compare(const Track& original, const Track& repaired,
                            double tolerance, double window_seconds = 10.0);

}  // namespace har::synth
