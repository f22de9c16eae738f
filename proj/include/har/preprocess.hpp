#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "har/types.hpp"

namespace har::preprocess {

struct Window {
    std::vector<double> values;  // 3 rows of length L: x, y, z
    int label = 0;               // class index 0..4 (A..E)
    int subject = 0;
    Device device = Device::Phone;
    std::size_t source_offset = 0;  // first sample index in the source track

    std::size_t length() const { return values.size() / 3; }
    const double* axis(int a) const { return values.data() + a * length(); }
};

struct WindowParams {
    double trim_seconds = 15.0;
    double window_seconds = 5.0;
    double stride_seconds = 1.0;
    double rate_hz = 20.0;

    std::size_t trim_samples() const;
    std::size_t window_samples() const;
    std::size_t stride_samples() const;
};

// Number of stride-spaced windows of length window fitting in n samples.
std::size_t window_count(std::size_t n, std::size_t window, std::size_t stride);

// Drops the first trim_seconds of the track, then cuts stride-spaced
// windows. Tracks whose activity is outside A..E, or too short, yield an
// empty list.
std::vector<Window> trim_and_window(const Track& track, const WindowParams& p = {});

struct WindowSet {
    std::size_t length = 0;  // L, samples per axis
    std::vector<Window> windows;

    std::vector<int> subjects() const;  // distinct, sorted
};

void save_windowset(const WindowSet& ws, const std::string& path);
WindowSet load_windowset(const std::string& path);

struct SplitPlan {
    std::vector<int> train, validation, test;
    std::uint64_t seed = 0;
};

struct NotEnoughSubjects : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooFewSubjects : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Uniformly random disjoint assignment; deterministic for a fixed seed.
SplitPlan make_split(std::vector<int> subjects, std::size_t n_train, std::size_t n_val,
                     std::size_t n_test, std::uint64_t seed);

// One plan per subject: that subject as test, all others as train,
// validation empty.
std::vector<SplitPlan> leave_one_out(std::vector<int> subjects);

WindowSet filter_by_subjects(const WindowSet& ws, const std::vector<int>& subjects);

}  // namespace har::preprocess
