#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "har/types.hpp"

namespace har::orientation {

enum class CaseLabel { Case1, Case2, Case3, Case4 };
enum class ZFacing { Out, In };

std::string to_string(CaseLabel c);

struct OrientationCase {
    CaseLabel label = CaseLabel::Case1;
    ZFacing z_facing = ZFacing::Out;

    bool operator==(const OrientationCase&) const = default;
};

struct Detection {
    OrientationCase detected;
    std::array<double, 3> means{};  // x, y, z
    bool indeterminate = false;     // max |mean| below significance threshold
};

// Significance threshold for the dominant-axis mean, in m/s^2 (0.25 g).
inline constexpr double kSignificanceThreshold = 0.25 * 9.81;

// Classifies a window by per-axis means: the gravity axis is the one with
// the largest |mean|; its sign selects the case. Requires nonempty spans.
Detection detect_case(std::span<const double> x, std::span<const double> y,
                      std::span<const double> z);

struct WindowTransform {
    std::array<double, 3> shift{0, 0, 0};  // added to x, y, z
    bool swap_xy = false;

    bool is_identity() const {
        return !swap_xy && shift[0] == 0 && shift[1] == 0 && shift[2] == 0;
    }
};

// Repairs one window in place: each axis with negative mean is shifted up
// by twice its |mean|, then X and Y are exchanged if mean(X) exceeds
// mean(Y) after shifting. Ties do not swap.
WindowTransform repair_window(std::span<double> x, std::span<double> y, std::span<double> z);

struct WindowRecord {
    std::size_t index = 0;
    std::size_t begin = 0, end = 0;  // sample range [begin, end)
    std::array<double, 3> means_before{};
    std::array<double, 3> means_after{};
    OrientationCase detected;
    OrientationCase stable;  // after hysteresis
    bool indeterminate = false;
    WindowTransform transform;
};

struct RepairLog {
    std::vector<WindowRecord> windows;

    std::size_t case_changes() const;  // stable-case transitions
    bool any_transform() const;
    std::string to_csv() const;
};

struct EmptyTrack : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultRepairWindowSeconds = 10.0;

// Partitions the track into consecutive windows of window_seconds at the
// given rate (final partial window processed as-is) and repairs each.
// The logged stable case changes only when a new detection is confirmed by
// the following window; the last window needs no confirmation.
RepairLog repair_track(Track& track, double window_seconds, double rate_hz);

}  // namespace har::orientation
