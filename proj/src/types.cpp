#include "har/types.hpp"

#include <algorithm>
#include <set>

namespace har {

std::string to_string(Device d) { return d == Device::Phone ? "phone" : "watch"; }
std::string to_string(Sensor s) { return s == Sensor::Accel ? "accel" : "gyro"; }

Device device_from_string(const std::string& s) {
    if (s == "phone") return Device::Phone;
    if (s == "watch") return Device::Watch;
    throw std::invalid_argument("unknown device: " + s);
}

Sensor sensor_from_string(const std::string& s) {
    if (s == "accel") return Sensor::Accel;
    if (s == "gyro") return Sensor::Gyro;
    throw std::invalid_argument("unknown sensor: " + s);
}

bool is_legal_activity(char code) { return code >= 'A' && code <= 'S' && code != 'N'; }

const char* class_name(int label) {
    static const char* names[] = {"Walking", "Jogging", "Stairs", "Sitting", "Standing"};
    if (label < 0 || label >= kNumClasses) return "?";
    return names[label];
}

std::vector<std::pair<int, char>> Dataset::missing_pairs(Device d, Sensor s) const {
    std::set<int> subjects;
    for (const auto& [key, _] : tracks)
        if (key.device == d && key.sensor == s) subjects.insert(key.subject);

    std::vector<std::pair<int, char>> missing;
    for (int subj : subjects) {
        for (char a = 'A'; a <= 'S'; ++a) {
            if (!is_legal_activity(a)) continue;
            if (!tracks.count({subj, a, d, s})) missing.emplace_back(subj, a);
        }
    }
    return missing;
}

}  // namespace har
