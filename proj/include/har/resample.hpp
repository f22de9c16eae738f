#pragma once

#include <string>
#include <vector>

#include "har/types.hpp"

namespace har::resample {

struct TooShort : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateTimestamps : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RateEstimate {
    double raw_hz = 0;           // 1 / median successive delta
    double snapped_hz = 0;       // raw rounded to nearest integer Hz
    double delta_iqr_seconds = 0;
};

// Estimates the sampling rate from the median of successive timestamp
// deltas. Throws TooShort (< 3 samples) or DegenerateTimestamps (median
// delta zero).
RateEstimate estimate_rate(const Track& track);

// Linear interpolation onto a uniform grid at target_hz spanning
// [first_ts, last_ts]; output length = floor(span * target_hz) + 1.
// Timestamps are regenerated on the uniform grid in the track's tick unit.
Track resample_track(const Track& track, double target_hz);

struct TotalsRow {
    Device device;
    Sensor sensor;
    std::size_t total_samples = 0;
    std::size_t track_count = 0;
};

struct TotalsReport {
    std::vector<TotalsRow> rows;
    std::size_t n_subjects = 0;
    std::size_t n_activities = 0;
    double duration_seconds = 0;
    double rate_hz = 0;
    std::size_t expectation = 0;  // subjects * activities * duration * rate

    std::string to_csv() const;
};

// Per-(device, sensor) sample totals with the closed-form expectation for
// comparison. Subject and activity counts are taken from the dataset keys.
TotalsReport dataset_totals(const Dataset& ds, double duration_seconds = 180.0,
                            double rate_hz = 20.0);

}  // namespace har::resample
