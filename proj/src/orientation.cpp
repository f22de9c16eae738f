#include "har/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace har::orientation {

namespace {

// Tolerance for "negative mean" and swap ties; absorbs the rounding left
// behind by a previous repair pass so a second pass applies no transforms.
constexpr double kMeanEps = 1e-12;

double mean(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

}  // namespace

std::string to_string(CaseLabel c) {
    switch (c) {
        case CaseLabel::Case1: return "case1";
        case CaseLabel::Case2: return "case2";
        case CaseLabel::Case3: return "case3";
        case CaseLabel::Case4: return "case4";
    }
    return "?";
}

Detection detect_case(std::span<const double> x, std::span<const double> y,
                      std::span<const double> z) {
    Detection d;
    d.means = {mean(x), mean(y), mean(z)};
    const auto [mx, my, mz] = d.means;

    int dominant = 0;
    double best = std::abs(mx);
    if (std::abs(my) > best) { dominant = 1; best = std::abs(my); }
    if (std::abs(mz) > best) { dominant = 2; best = std::abs(mz); }

    d.indeterminate = best < kSignificanceThreshold;

    if (dominant == 0) {
        d.detected.label = mx > 0 ? CaseLabel::Case2 : CaseLabel::Case4;
    } else if (dominant == 1) {
        d.detected.label = my > 0 ? CaseLabel::Case1 : CaseLabel::Case3;
    } else {
        // Z carries gravity (static, device flat); the X/Y label falls back
        // to the Y sign and the Z sign gives the facing.
        d.detected.label = my >= 0 ? CaseLabel::Case1 : CaseLabel::Case3;
        d.detected.z_facing = mz < 0 ? ZFacing::In : ZFacing::Out;
    }
    return d;
}

WindowTransform repair_window(std::span<double> x, std::span<double> y,
                              std::span<double> z) {
    WindowTransform t;
    std::array<std::span<double>, 3> axes{x, y, z};
    std::array<double, 3> m{mean(x), mean(y), mean(z)};

    for (int a = 0; a < 3; ++a) {
        if (m[a] < -kMeanEps) {
            double shift = 2.0 * std::abs(m[a]);
            for (double& v : axes[a]) v += shift;
            t.shift[a] = shift;
            m[a] += shift;
        }
    }
    if (m[0] > m[1] + kMeanEps) {
        std::swap_ranges(x.begin(), x.end(), y.begin());
        t.swap_xy = true;
    }
    return t;
}

std::size_t RepairLog::case_changes() const {
    std::size_t n = 0;
    for (std::size_t i = 1; i < windows.size(); ++i)
        if (windows[i].stable.label != windows[i - 1].stable.label) ++n;
    return n;
}

bool RepairLog::any_transform() const {
    return std::any_of(windows.begin(), windows.end(),
                       [](const WindowRecord& w) { return !w.transform.is_identity(); });
}

std::string RepairLog::to_csv() const {
    std::ostringstream os;
    os << "window,begin,end,mean_x,mean_y,mean_z,detected,stable,indeterminate,"
          "shift_x,shift_y,shift_z,swap_xy,mean_x_after,mean_y_after,mean_z_after\n";
    for (const auto& w : windows) {
        os << w.index << ',' << w.begin << ',' << w.end << ',' << w.means_before[0] << ','
           << w.means_before[1] << ',' << w.means_before[2] << ','
           << to_string(w.detected.label) << ',' << to_string(w.stable.label) << ','
           << (w.indeterminate ? 1 : 0) << ',' << w.transform.shift[0] << ','
           << w.transform.shift[1] << ',' << w.transform.shift[2] << ','
           << (w.transform.swap_xy ? 1 : 0) << ',' << w.means_after[0] << ','
           << w.means_after[1] << ',' << w.means_after[2] << '\n';
    }
    return os.str();
}

RepairLog repair_track(Track& track, double window_seconds, double rate_hz) {
    if (track.empty()) throw EmptyTrack("repair_track: empty track");

    const std::size_t n = track.size();
    const std::size_t win = std::max<std::size_t>(1, std::size_t(window_seconds * rate_hz));
    const std::size_t n_windows = (n + win - 1) / win;

    // First pass: detections per window (needed for the one-window
    // confirmation lookahead before transforms are applied).
    std::vector<Detection> detections(n_windows);
    for (std::size_t w = 0; w < n_windows; ++w) {
        std::size_t b = w * win, e = std::min(n, b + win);
        detections[w] = detect_case({track.x.data() + b, e - b},
                                    {track.y.data() + b, e - b},
                                    {track.z.data() + b, e - b});
    }

    RepairLog log;
    log.windows.reserve(n_windows);
    OrientationCase stable = detections[0].detected;
    for (std::size_t w = 0; w < n_windows; ++w) {
        std::size_t b = w * win, e = std::min(n, b + win);
        const auto& det = detections[w];

        // Hysteresis on the logged case: a new detection becomes the stable
        // case only when the next window agrees (the last window has no
        // successor and is accepted as-is).
        if (det.detected.label != stable.label) {
            if (w + 1 >= n_windows || detections[w + 1].detected.label == det.detected.label)
                stable = det.detected;
        } else {
            stable = det.detected;  // refresh z_facing on agreement
        }

        WindowRecord rec;
        rec.index = w;
        rec.begin = b;
        rec.end = e;
        rec.means_before = det.means;
        rec.detected = det.detected;
        rec.stable = stable;
        rec.indeterminate = det.indeterminate;
        rec.transform = repair_window({track.x.data() + b, e - b},
                                      {track.y.data() + b, e - b},
                                      {track.z.data() + b, e - b});
        auto after = detect_case({track.x.data() + b, e - b},
                                 {track.y.data() + b, e - b},
                                 {track.z.data() + b, e - b});
        rec.means_after = after.means;
        log.windows.push_back(std::move(rec));
    }
    return log;
}

}  // namespace har::orientation
