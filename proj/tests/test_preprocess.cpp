#include <algorithm>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "har/cnn/tensor.hpp"
#include "har/preprocess.hpp"
#include "har/synth.hpp"

using namespace har;
using namespace har::preprocess;

namespace {

// Independent enumeration: slide a window and count the fits.
std::size_t brute_force_count(std::size_t n, std::size_t window, std::size_t stride) {
    std::size_t count = 0;
    for (std::size_t start = 0; start + window <= n; start += stride) ++count;
    return count;
}

Track make_track(std::size_t n, char activity = 'A', int subject = 1600) {
    Track t;
    t.key = {subject, activity, Device::Phone, Sensor::Accel};
    t.tick_seconds = 1e-3;
    for (std::size_t i = 0; i < n; ++i) {
        t.ts.push_back(std::int64_t(i) * 50);
        t.x.push_back(double(i));
        t.y.push_back(9.8);
        t.z.push_back(0.0);
    }
    return t;
}

}  // namespace

TEST_CASE("3600-sample track yields 161 windows") {
    auto windows = trim_and_window(make_track(3600));
    CHECK(windows.size() == 161);
    for (const auto& w : windows) {
        CHECK(w.length() == 100);
        CHECK(w.label == 0);
    }
}

TEST_CASE("399 samples post-trim yield 15 windows") {
    // 300 trim samples + 399 usable
    auto windows = trim_and_window(make_track(699));
    CHECK(windows.size() == 15);
}

TEST_CASE("99 samples post-trim yield no windows") {
    auto windows = trim_and_window(make_track(399));
    CHECK(windows.empty());
}

TEST_CASE("window count formula matches brute-force enumeration") {
    cnn::Rng rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = rng.below(3000);
        std::size_t window = 1 + rng.below(300);
        std::size_t stride = 1 + rng.below(60);
        CHECK(window_count(n, window, stride) == brute_force_count(n, window, stride));
    }
}

TEST_CASE("windows are contiguous slices after the trim boundary") {
    auto track = make_track(1200);
    auto windows = trim_and_window(track);
    REQUIRE(!windows.empty());
    for (const auto& w : windows) {
        CHECK(w.source_offset >= 300);  // never spans the trim boundary
        for (std::size_t i = 0; i < w.length(); ++i)
            CHECK(w.axis(0)[i] == track.x[w.source_offset + i]);
    }
}

TEST_CASE("non-classification activities are filtered out") {
    CHECK(trim_and_window(make_track(3600, 'F')).empty());
    CHECK(trim_and_window(make_track(3600, 'S')).empty());
    CHECK(!trim_and_window(make_track(3600, 'E')).empty());
}

TEST_CASE("make_split produces disjoint sets of requested sizes") {
    std::vector<int> subjects;
    for (int s = 1600; s <= 1650; ++s) subjects.push_back(s);

    auto plan = make_split(subjects, 41, 5, 5, 7);
    CHECK(plan.train.size() == 41);
    CHECK(plan.validation.size() == 5);
    CHECK(plan.test.size() == 5);

    std::set<int> all;
    for (auto part : {&plan.train, &plan.validation, &plan.test})
        for (int s : *part) CHECK(all.insert(s).second);  // no subject twice
    CHECK(all.size() == 51);
}

TEST_CASE("make_split degenerate sizes and determinism") {
    std::vector<int> subjects = {1, 2, 3, 4, 5};
    auto plan = make_split(subjects, 5, 0, 0, 3);
    CHECK(plan.train.size() == 5);
    CHECK(plan.test.empty());

    auto a = make_split(subjects, 3, 1, 1, 42);
    auto b = make_split(subjects, 3, 1, 1, 42);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);

    CHECK_THROWS_AS(make_split(subjects, 5, 1, 0, 0), NotEnoughSubjects);
}

TEST_CASE("leave_one_out partitions the subject set") {
    std::vector<int> subjects = {10, 11, 12, 13};
    auto plans = leave_one_out(subjects);
    REQUIRE(plans.size() == 4);
    std::multiset<int> test_union;
    for (const auto& p : plans) {
        REQUIRE(p.test.size() == 1);
        CHECK(p.train.size() == 3);
        CHECK(p.validation.empty());
        test_union.insert(p.test[0]);
        CHECK(std::find(p.train.begin(), p.train.end(), p.test[0]) == p.train.end());
    }
    CHECK(test_union == std::multiset<int>(subjects.begin(), subjects.end()));

    CHECK(leave_one_out({1, 2}).size() == 2);
    CHECK_THROWS_AS(leave_one_out({1}), TooFewSubjects);
}

TEST_CASE("window set save/load round-trip") {
    WindowSet ws;
    ws.length = 100;
    for (int subj : {1600, 1601})
        for (const auto& w : trim_and_window(make_track(1000, 'B', subj)))
            ws.windows.push_back(w);
    REQUIRE(!ws.windows.empty());

    auto path = (std::filesystem::temp_directory_path() / "har_ws_test.bin").string();
    save_windowset(ws, path);
    auto loaded = load_windowset(path);
    REQUIRE(loaded.windows.size() == ws.windows.size());
    CHECK(loaded.length == 100);
    for (std::size_t i = 0; i < ws.windows.size(); ++i) {
        CHECK(loaded.windows[i].values == ws.windows[i].values);
        CHECK(loaded.windows[i].label == ws.windows[i].label);
        CHECK(loaded.windows[i].subject == ws.windows[i].subject);
        CHECK(loaded.windows[i].device == ws.windows[i].device);
        CHECK(loaded.windows[i].source_offset == ws.windows[i].source_offset);
    }
    CHECK(loaded.subjects() == std::vector<int>{1600, 1601});
}

TEST_CASE("filter_by_subjects keeps only requested subjects") {
    WindowSet ws;
    ws.length = 100;
    for (int subj : {1, 2, 3})
        for (const auto& w : trim_and_window(make_track(800, 'A', subj)))
            ws.windows.push_back(w);
    auto filtered = filter_by_subjects(ws, {2});
    CHECK(!filtered.windows.empty());
    for (const auto& w : filtered.windows) CHECK(w.subject == 2);
}
