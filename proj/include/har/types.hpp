#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace har {

enum class Device { Phone, Watch };
enum class Sensor { Accel, Gyro };

std::string to_string(Device d);
std::string to_string(Sensor s);
Device device_from_string(const std::string& s);
Sensor sensor_from_string(const std::string& s);

// Legal activity codes: A through S, with N excluded.
bool is_legal_activity(char code);

// The five classification activities.
// A=Walking, B=Jogging, C=Stairs, D=Sitting, E=Standing.
inline constexpr char kClassActivities[5] = {'A', 'B', 'C', 'D', 'E'};
inline constexpr int kNumClasses = 5;
const char* class_name(int label);

struct Sample {
    int subject = 0;
    char activity = 'A';
    std::int64_t timestamp = 0;
    double x = 0, y = 0, z = 0;
};

struct TrackKey {
    int subject = 0;
    char activity = 'A';
    Device device = Device::Phone;
    Sensor sensor = Sensor::Accel;

    auto operator<=>(const TrackKey&) const = default;
};

// One (subject, activity, device, sensor) triaxial series; the unit of repair.
// Stored axis-major so per-axis kernels run over contiguous memory.
struct Track {
    TrackKey key;
    std::vector<std::int64_t> ts;
    std::vector<double> x, y, z;
    double tick_seconds = 1e-3;  // seconds per timestamp tick

    std::size_t size() const { return ts.size(); }
    bool empty() const { return ts.empty(); }
    double span_seconds() const {
        return ts.empty() ? 0.0 : double(ts.back() - ts.front()) * tick_seconds;
    }
};

struct Dataset {
    std::map<TrackKey, Track> tracks;
    std::vector<std::string> sources;

    // (subject, activity) pairs absent for a given (device, sensor).
    std::vector<std::pair<int, char>> missing_pairs(Device d, Sensor s) const;
};

}  // namespace har
