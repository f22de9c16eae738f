#include "har/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace har::ingest {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace((unsigned char)s.front())) s.remove_prefix(1);
    while (!s.empty() && std::isspace((unsigned char)s.back())) s.remove_suffix(1);
    return s;
}

bool parse_i64(std::string_view s, std::int64_t& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

ParsedLine parse_line(std::string_view line) {
    ParsedLine r;
    auto body = trim(line);
    if (!body.empty() && body.back() == ';') body.remove_suffix(1);

    std::array<std::string_view, 6> fields;
    std::size_t count = 0;
    while (true) {
        auto comma = body.find(',');
        auto field = trim(comma == body.npos ? body : body.substr(0, comma));
        if (count == 6) {
            r.message = "too many fields";
            return r;
        }
        fields[count++] = field;
        if (comma == body.npos) break;
        body.remove_prefix(comma + 1);
    }
    if (count != 6) {
        r.message = "expected 6 fields, got " + std::to_string(count);
        return r;
    }

    std::int64_t subject = 0;
    if (!parse_i64(fields[0], subject) || subject <= 0) {
        r.message = "bad subject id";
        return r;
    }
    if (fields[1].size() != 1) {
        r.message = "bad activity field";
        return r;
    }
    char activity = fields[1][0];
    if (!is_legal_activity(activity)) {
        r.status = LineStatus::IllegalActivity;
        r.message = std::string("illegal activity code '") + activity + "'";
        return r;
    }
    std::int64_t ts = 0;
    if (!parse_i64(fields[2], ts)) {
        r.message = "bad timestamp";
        return r;
    }
    double x, y, z;
    if (!parse_double(fields[3], x) || !parse_double(fields[4], y) ||
        !parse_double(fields[5], z)) {
        r.message = "bad axis value";
        return r;
    }

    r.status = LineStatus::Ok;
    r.sample = {int(subject), activity, ts, x, y, z};
    return r;
}

FileSpec infer_file_spec(const std::string& path) {
    FileSpec spec{path, Device::Phone, Sensor::Accel};
    std::string lower;
    lower.reserve(path.size());
    for (char c : path) lower.push_back(char(std::tolower((unsigned char)c)));
    if (lower.find("watch") != lower.npos) spec.device = Device::Watch;
    if (lower.find("gyro") != lower.npos) spec.sensor = Sensor::Gyro;
    return spec;
}

std::string IngestReport::to_json() const {
    nlohmann::json j;
    j["lines_read"] = lines_read;
    j["lines_parsed"] = lines_parsed;
    j["lines_skipped"] = lines_skipped;
    j["duplicates_dropped"] = duplicates_dropped;
    auto& keys = j["keys"] = nlohmann::json::array();
    for (const auto& [key, n] : samples_per_key) {
        keys.push_back({{"subject", key.subject},
                        {"activity", std::string(1, key.activity)},
                        {"device", to_string(key.device)},
                        {"sensor", to_string(key.sensor)},
                        {"samples", n}});
    }
    return j.dump(2);
}

LoadResult load_dataset(const std::vector<FileSpec>& files, Policy policy) {
    LoadResult out;
    // (key, unit) -> raw samples; unit detected per file
    std::map<TrackKey, std::vector<Sample>> grouped;
    std::map<TrackKey, double> tick;

    for (const auto& spec : files) {
        std::ifstream in(spec.path);
        if (!in) throw LoadError("cannot open " + spec.path);
        out.dataset.sources.push_back(spec.path);

        std::string line;
        std::size_t lineno = 0;
        double file_tick = 0;  // detected from the first valid timestamp
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            ++out.report.lines_read;
            auto parsed = parse_line(line);
            if (!parsed.ok()) {
                if (policy == Policy::Strict)
                    throw LoadError(spec.path + ":" + std::to_string(lineno) + ": " +
                                    parsed.message);
                ++out.report.lines_skipped;
                continue;
            }
            ++out.report.lines_parsed;
            if (file_tick == 0)
                file_tick = parsed.sample.timestamp >= 100000000000000LL ? 1e-9 : 1e-3;
            TrackKey key{parsed.sample.subject, parsed.sample.activity, spec.device,
                         spec.sensor};
            grouped[key].push_back(parsed.sample);
            tick[key] = file_tick;
        }
    }

    for (auto& [key, samples] : grouped) {
        std::stable_sort(samples.begin(), samples.end(),
                         [](const Sample& a, const Sample& b) {
                             return a.timestamp < b.timestamp;
                         });
        Track t;
        t.key = key;
        t.tick_seconds = tick[key];
        t.ts.reserve(samples.size());
        for (const auto& s : samples) {
            if (!t.ts.empty() && s.timestamp == t.ts.back()) {
                ++out.report.duplicates_dropped;
                continue;
            }
            t.ts.push_back(s.timestamp);
            t.x.push_back(s.x);
            t.y.push_back(s.y);
            t.z.push_back(s.z);
        }
        out.report.samples_per_key[key] = t.size();
        out.dataset.tracks.emplace(key, std::move(t));
    }
    return out;
}

LoadResult load_dataset(const std::vector<std::string>& paths, Policy policy) {
    std::vector<FileSpec> specs;
    specs.reserve(paths.size());
    for (const auto& p : paths) specs.push_back(infer_file_spec(p));
    return load_dataset(specs, policy);
}

void write_tracks(const std::vector<const Track*>& tracks, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw LoadError("cannot write " + path);
    char buf[160];
    for (const Track* t : tracks) {
        for (std::size_t i = 0; i < t->size(); ++i) {
            int n = std::snprintf(buf, sizeof buf, "%d,%c,%lld,%.6f,%.6f,%.6f;\n",
                                  t->key.subject, t->key.activity,
                                  (long long)t->ts[i], t->x[i], t->y[i], t->z[i]);
            out.write(buf, n);
        }
    }
    if (!out) throw LoadError("write failed: " + path);
}

std::vector<std::string> write_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    std::map<std::pair<Device, Sensor>, std::vector<const Track*>> by_file;
    for (const auto& [key, track] : ds.tracks)
        by_file[{key.device, key.sensor}].push_back(&track);

    std::vector<std::string> written;
    for (const auto& [ds_key, tracks] : by_file) {
        auto path = (fs::path(dir) /
                     (to_string(ds_key.first) + "_" + to_string(ds_key.second) + ".txt"))
                        .string();
        write_tracks(tracks, path);
        written.push_back(path);
    }
    return written;
}

}  // namespace har::ingest
