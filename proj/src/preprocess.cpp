#include "har/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "har/cnn/tensor.hpp"

namespace har::preprocess {

namespace {

int label_for_activity(char code) {
    for (int i = 0; i < kNumClasses; ++i)
        if (kClassActivities[i] == code) return i;
    return -1;
}

constexpr char kMagic[8] = {'H', 'A', 'R', 'W', 'S', 'E', 'T', '1'};

}  // namespace

std::size_t WindowParams::trim_samples() const {
    return std::size_t(std::llround(trim_seconds * rate_hz));
}
std::size_t WindowParams::window_samples() const {
    return std::size_t(std::llround(window_seconds * rate_hz));
}
std::size_t WindowParams::stride_samples() const {
    return std::size_t(std::llround(stride_seconds * rate_hz));
}

std::size_t window_count(std::size_t n, std::size_t window, std::size_t stride) {
    if (n < window) return 0;
    return (n - window) / stride + 1;
}

std::vector<Window> trim_and_window(const Track& track, const WindowParams& p) {
    std::vector<Window> out;
    int label = label_for_activity(track.key.activity);
    if (label < 0) return out;

    const std::size_t trim = p.trim_samples();
    const std::size_t L = p.window_samples();
    const std::size_t stride = p.stride_samples();
    if (track.size() <= trim) return out;

    const std::size_t n = track.size() - trim;
    const std::size_t count = window_count(n, L, stride);
    out.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        std::size_t b = trim + w * stride;
        Window win;
        win.label = label;
        win.subject = track.key.subject;
        win.device = track.key.device;
        win.source_offset = b;
        win.values.resize(3 * L);
        std::copy_n(track.x.data() + b, L, win.values.data());
        std::copy_n(track.y.data() + b, L, win.values.data() + L);
        std::copy_n(track.z.data() + b, L, win.values.data() + 2 * L);
        out.push_back(std::move(win));
    }
    return out;
}

std::vector<int> WindowSet::subjects() const {
    std::set<int> s;
    for (const auto& w : windows) s.insert(w.subject);
    return {s.begin(), s.end()};
}

void save_windowset(const WindowSet& ws, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(kMagic, sizeof kMagic);
    auto put_u64 = [&](std::uint64_t v) { out.write((const char*)&v, 8); };
    put_u64(ws.length);
    put_u64(ws.windows.size());
    for (const auto& w : ws.windows) {
        std::int32_t meta[3] = {std::int32_t(w.label), std::int32_t(w.subject),
                                std::int32_t(w.device == Device::Watch ? 1 : 0)};
        out.write((const char*)meta, sizeof meta);
        put_u64(w.source_offset);
        out.write((const char*)w.values.data(), std::streamsize(w.values.size() * 8));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

WindowSet load_windowset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error(path + ": not a window-set file");

    auto get_u64 = [&] {
        std::uint64_t v = 0;
        in.read((char*)&v, 8);
        return v;
    };
    WindowSet ws;
    ws.length = get_u64();
    std::uint64_t n = get_u64();
    ws.windows.resize(n);
    for (auto& w : ws.windows) {
        std::int32_t meta[3];
        in.read((char*)meta, sizeof meta);
        w.label = meta[0];
        w.subject = meta[1];
        w.device = meta[2] ? Device::Watch : Device::Phone;
        w.source_offset = get_u64();
        w.values.resize(3 * ws.length);
        in.read((char*)w.values.data(), std::streamsize(w.values.size() * 8));
    }
    if (!in) throw std::runtime_error(path + ": truncated window-set file");
    return ws;
}

SplitPlan make_split(std::vector<int> subjects, std::size_t n_train, std::size_t n_val,
                     std::size_t n_test, std::uint64_t seed) {
    if (n_train + n_val + n_test > subjects.size())
        throw NotEnoughSubjects("make_split: sizes exceed subject count");

    std::sort(subjects.begin(), subjects.end());
    cnn::Rng rng(seed);
    // Fisher-Yates with the portable RNG; std::shuffle's draw order is
    // implementation-defined.
    for (std::size_t i = subjects.size(); i > 1; --i)
        std::swap(subjects[i - 1], subjects[rng.below(i)]);

    SplitPlan plan;
    plan.seed = seed;
    auto it = subjects.begin();
    plan.train.assign(it, it + n_train);
    it += n_train;
    plan.validation.assign(it, it + n_val);
    it += n_val;
    plan.test.assign(it, it + n_test);
    return plan;
}

std::vector<SplitPlan> leave_one_out(std::vector<int> subjects) {
    if (subjects.size() < 2) throw TooFewSubjects("leave_one_out: need >= 2 subjects");
    std::sort(subjects.begin(), subjects.end());
    std::vector<SplitPlan> plans;
    plans.reserve(subjects.size());
    for (int held_out : subjects) {
        SplitPlan p;
        p.test = {held_out};
        for (int s : subjects)
            if (s != held_out) p.train.push_back(s);
        plans.push_back(std::move(p));
    }
    return plans;
}

WindowSet filter_by_subjects(const WindowSet& ws, const std::vector<int>& subjects) {
    std::set<int> keep(subjects.begin(), subjects.end());
    WindowSet out;
    out.length = ws.length;
    for (const auto& w : ws.windows)
        if (keep.count(w.subject)) out.windows.push_back(w);
    return out;
}

}  // namespace har::preprocess
