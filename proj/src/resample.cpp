#include "har/resample.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace har::resample {

namespace {

double median(std::vector<double> v) {
    auto mid = v.begin() + v.size() / 2;
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (v.size() % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    double pos = q * double(v.size() - 1);
    std::size_t i = std::size_t(pos);
    double frac = pos - double(i);
    if (i + 1 >= v.size()) return v.back();
    return v[i] * (1 - frac) + v[i + 1] * frac;
}

}  // namespace

RateEstimate estimate_rate(const Track& track) {
    if (track.size() < 3) throw TooShort("estimate_rate: need >= 3 samples");

    std::vector<double> deltas(track.size() - 1);
    for (std::size_t i = 1; i < track.size(); ++i)
        deltas[i - 1] = double(track.ts[i] - track.ts[i - 1]) * track.tick_seconds;

    double med = median(deltas);
    if (med <= 0) throw DegenerateTimestamps("estimate_rate: median delta is zero");

    RateEstimate e;
    e.raw_hz = 1.0 / med;
    e.snapped_hz = std::round(e.raw_hz);
    e.delta_iqr_seconds = quantile(deltas, 0.75) - quantile(deltas, 0.25);
    return e;
}

Track resample_track(const Track& track, double target_hz) {
    if (track.size() < 3) throw TooShort("resample_track: need >= 3 samples");
    if (target_hz <= 0) throw std::invalid_argument("resample_track: target_hz <= 0");

    const double span = track.span_seconds();
    // small slack so exact-rate inputs keep their final grid point
    const std::size_t n_out = std::size_t(std::floor(span * target_hz + 1e-9)) + 1;
    const double period_ticks = 1.0 / (target_hz * track.tick_seconds);

    Track out;
    out.key = track.key;
    out.tick_seconds = track.tick_seconds;
    out.ts.resize(n_out);
    out.x.resize(n_out);
    out.y.resize(n_out);
    out.z.resize(n_out);

    std::size_t j = 0;  // left bracket; grid times are nondecreasing
    for (std::size_t i = 0; i < n_out; ++i) {
        double t = double(track.ts.front()) + double(i) * period_ticks;
        while (j + 2 < track.size() && double(track.ts[j + 1]) <= t) ++j;
        double t0 = double(track.ts[j]), t1 = double(track.ts[j + 1]);
        double a = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
        out.ts[i] = track.ts.front() + std::int64_t(std::llround(double(i) * period_ticks));
        out.x[i] = track.x[j] + a * (track.x[j + 1] - track.x[j]);
        out.y[i] = track.y[j] + a * (track.y[j + 1] - track.y[j]);
        out.z[i] = track.z[j] + a * (track.z[j + 1] - track.z[j]);
    }
    return out;
}

std::string TotalsReport::to_csv() const {
    std::ostringstream os;
    os << "device,sensor,tracks,total_samples,expectation\n";
    for (const auto& r : rows)
        os << to_string(r.device) << ',' << to_string(r.sensor) << ',' << r.track_count
           << ',' << r.total_samples << ',' << expectation << '\n';
    return os.str();
}

TotalsReport dataset_totals(const Dataset& ds, double duration_seconds, double rate_hz) {
    TotalsReport rep;
    rep.duration_seconds = duration_seconds;
    rep.rate_hz = rate_hz;

    std::set<int> subjects;
    std::set<char> activities;
    std::map<std::pair<Device, Sensor>, TotalsRow> rows;
    for (const auto& [key, track] : ds.tracks) {
        subjects.insert(key.subject);
        activities.insert(key.activity);
        auto& row = rows[{key.device, key.sensor}];
        row.device = key.device;
        row.sensor = key.sensor;
        row.total_samples += track.size();
        row.track_count += 1;
    }
    rep.n_subjects = subjects.size();
    rep.n_activities = activities.size();
    rep.expectation = std::size_t(
        double(rep.n_subjects) * double(rep.n_activities) * duration_seconds * rate_hz);
    for (const auto& [_, row] : rows) rep.rows.push_back(row);
    return rep;
}

}  // namespace har::resample
