// Command-line pipeline for repairing wearable sensor recordings and
// training the activity classifier on the repaired windows.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "har/cnn/checkpoint.hpp"
#include "har/cnn/train.hpp"
#include "har/ingest.hpp"
#include "har/orientation.hpp"
#include "har/preprocess.hpp"
#include "har/resample.hpp"
#include "har/synth.hpp"

namespace fs = std::filesystem;
using namespace har;
using nlohmann::json;

namespace {

std::string key_string(const TrackKey& k) {
    return std::to_string(k.subject) + "/" + std::string(1, k.activity) + "/" +
           to_string(k.device) + "/" + to_string(k.sensor);
}

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::vector<std::string> expand_inputs(const std::vector<std::string>& paths) {
    std::vector<std::string> files;
    for (const auto& p : paths) {
        if (fs::is_directory(p)) {
            for (const auto& entry : fs::recursive_directory_iterator(p))
                if (entry.is_regular_file() && entry.path().extension() == ".txt")
                    files.push_back(entry.path().string());
        } else {
            files.push_back(p);
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

// ------------------------------------------------------------------ inspect

int cmd_inspect(const std::vector<std::string>& inputs, const std::string& report_path,
                bool strict) {
    auto files = expand_inputs(inputs);
    auto [ds, report] = ingest::load_dataset(
        files, strict ? ingest::Policy::Strict : ingest::Policy::SkipAndCount);

    json j;
    j["ingest"] = json::parse(report.to_json());
    auto& rows = j["tracks"] = json::array();
    for (auto& [key, track] : ds.tracks) {
        json row;
        row["key"] = key_string(key);
        row["samples"] = track.size();
        try {
            auto rate = resample::estimate_rate(track);
            row["raw_hz"] = rate.raw_hz;
            row["snapped_hz"] = rate.snapped_hz;
        } catch (const std::exception& e) {
            row["rate_error"] = e.what();
        }
        try {
            auto rate = resample::estimate_rate(track);
            auto log = orientation::repair_track(track, 10.0, rate.snapped_hz);
            std::map<std::string, int> cases;
            for (const auto& w : log.windows) ++cases[to_string(w.detected.label)];
            row["orientation"] = cases;
        } catch (const std::exception&) {
        }
        rows.push_back(row);
    }
    for (auto device : {Device::Phone, Device::Watch})
        for (auto sensor : {Sensor::Accel, Sensor::Gyro}) {
            auto missing = ds.missing_pairs(device, sensor);
            if (missing.empty()) continue;
            auto& arr = j["missing"][to_string(device) + "_" + to_string(sensor)];
            for (auto [subj, act] : missing)
                arr.push_back(std::to_string(subj) + "/" + std::string(1, act));
        }
    auto totals = resample::dataset_totals(ds);
    for (const auto& row : totals.rows)
        j["totals"][to_string(row.device) + "_" + to_string(row.sensor)] = row.total_samples;
    j["expected_total"] = totals.expectation;

    std::string text = j.dump(2);
    if (report_path.empty())
        std::cout << text << '\n';
    else
        write_text(report_path, text);
    return 0;
}

// ------------------------------------------------------------------- repair

int cmd_repair(const std::vector<std::string>& inputs, const std::string& out_dir,
               double target_hz, double repair_window_s) {
    auto files = expand_inputs(inputs);
    auto [ds, report] = ingest::load_dataset(files);

    std::vector<TrackKey> keys;
    for (const auto& [key, _] : ds.tracks) keys.push_back(key);

    Dataset repaired;
    repaired.sources = ds.sources;
    std::map<TrackKey, orientation::RepairLog> logs;
    std::vector<std::string> failures(keys.size());

    std::vector<Track> outputs(keys.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < keys.size(); ++i) {
        try {
            const Track& in = ds.tracks.at(keys[i]);
            Track t = resample::resample_track(in, target_hz);
            auto log = orientation::repair_track(t, repair_window_s, target_hz);
            outputs[i] = std::move(t);
#pragma omp critical
            logs.emplace(keys[i], std::move(log));
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    }

    for (std::size_t i = 0; i < keys.size(); ++i)
        if (failures[i].empty()) repaired.tracks.emplace(keys[i], std::move(outputs[i]));

    fs::create_directories(out_dir);
    ingest::write_dataset(repaired, out_dir);
    for (const auto& [key, log] : logs) {
        auto name = std::to_string(key.subject) + "_" + key.activity + "_" +
                    to_string(key.device) + "_" + to_string(key.sensor) + ".repairlog.csv";
        write_text(fs::path(out_dir) / "logs" / name, log.to_csv());
    }
    auto totals = resample::dataset_totals(repaired);
    write_text(fs::path(out_dir) / "totals.csv", totals.to_csv());

    int failed = 0;
    for (std::size_t i = 0; i < keys.size(); ++i)
        if (!failures[i].empty()) {
            std::cerr << "repair failed for " << key_string(keys[i]) << ": " << failures[i]
                      << '\n';
            ++failed;
        }
    std::cout << "repaired " << repaired.tracks.size() << " tracks -> " << out_dir << '\n';
    return failed ? 1 : 0;
}

// ----------------------------------------------------------------- resample

int cmd_resample(const std::vector<std::string>& inputs, const std::string& out_dir,
                 double target_hz) {
    auto files = expand_inputs(inputs);
    auto [ds, report] = ingest::load_dataset(files);
    Dataset out;
    int failed = 0;
    for (const auto& [key, track] : ds.tracks) {
        try {
            out.tracks.emplace(key, resample::resample_track(track, target_hz));
        } catch (const std::exception& e) {
            std::cerr << "resample failed for " << key_string(key) << ": " << e.what()
                      << '\n';
            ++failed;
        }
    }
    ingest::write_dataset(out, out_dir);
    write_text(fs::path(out_dir) / "totals.csv", resample::dataset_totals(out).to_csv());
    return failed ? 1 : 0;
}

// --------------------------------------------------------------- preprocess

int cmd_preprocess(const std::vector<std::string>& inputs, const std::string& out_dir,
                   const preprocess::WindowParams& params, std::uint64_t seed,
                   std::vector<std::size_t> split_sizes) {
    auto files = expand_inputs(inputs);
    auto [ds, report] = ingest::load_dataset(files);

    std::map<Device, preprocess::WindowSet> sets;
    for (const auto& [key, track] : ds.tracks) {
        if (key.sensor != Sensor::Accel) continue;
        auto windows = preprocess::trim_and_window(track, params);
        auto& ws = sets[key.device];
        ws.length = params.window_samples();
        for (auto& w : windows) ws.windows.push_back(std::move(w));
    }

    fs::create_directories(out_dir);
    std::set<int> all_subjects;
    for (auto& [device, ws] : sets) {
        preprocess::save_windowset(ws, (fs::path(out_dir) / (to_string(device) + ".win")).string());
        for (int s : ws.subjects()) all_subjects.insert(s);
        std::cout << to_string(device) << ": " << ws.windows.size() << " windows\n";
    }

    if (!all_subjects.empty() && split_sizes.size() == 3 &&
        split_sizes[0] + split_sizes[1] + split_sizes[2] <= all_subjects.size()) {
        auto plan = preprocess::make_split({all_subjects.begin(), all_subjects.end()},
                                           split_sizes[0], split_sizes[1], split_sizes[2],
                                           seed);
        json j;
        j["seed"] = seed;
        j["train"] = plan.train;
        j["validation"] = plan.validation;
        j["test"] = plan.test;
        write_text(fs::path(out_dir) / "split.json", j.dump(2));
    }
    return 0;
}

// -------------------------------------------------------------- train/eval

cnn::CnnConfig config_with(std::size_t epochs, std::uint64_t seed, double lr,
                           std::size_t batch) {
    cnn::CnnConfig cfg;
    cfg.epochs = epochs;
    cfg.seed = seed;
    cfg.learning_rate = lr;
    cfg.batch_size = batch;
    return cfg;
}

int cmd_train(const std::string& windows_path, const std::string& ckpt_path,
              const std::string& curve_path, const cnn::CnnConfig& cfg) {
    if (!fs::exists(windows_path)) {
        std::cerr << windows_path << " not found; run `har preprocess` first\n";
        return 1;
    }
    auto ws = preprocess::load_windowset(windows_path);
    auto result = cnn::train(cfg, ws);
    cnn::save_checkpoint(*result.model, ckpt_path);
    if (!curve_path.empty()) write_text(curve_path, result.curve_csv());
    std::cout << "final training accuracy " << result.curve.back().accuracy << '\n';
    return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& windows_path) {
    if (!fs::exists(ckpt_path)) {
        std::cerr << ckpt_path << " not found; run `har train` first\n";
        return 1;
    }
    auto model = cnn::load_checkpoint(ckpt_path);
    auto ws = preprocess::load_windowset(windows_path);
    auto ev = cnn::evaluate(*model, ws);
    std::cout << "micro_f1 " << ev.micro_f1 << "\naccuracy " << ev.accuracy << "\n";
    for (const auto& row : ev.confusion) {
        for (std::size_t k = 0; k < row.size(); ++k)
            std::cout << row[k] << (k + 1 < row.size() ? ',' : '\n');
    }
    return 0;
}

int cmd_cross_eval(const std::string& phone_path, const std::string& watch_path,
                   const std::string& report_path, const cnn::CnnConfig& cfg, bool loo) {
    for (const auto& p : {phone_path, watch_path})
        if (!fs::exists(p)) {
            std::cerr << p << " not found; run `har preprocess` first\n";
            return 1;
        }
    auto phone = preprocess::load_windowset(phone_path);
    auto watch = preprocess::load_windowset(watch_path);
    auto rep = cnn::cross_eval(phone, watch, cfg, loo);
    std::string csv = rep.to_csv();
    if (report_path.empty())
        std::cout << csv;
    else
        write_text(report_path, csv);
    std::cout << "f1 phone->phone " << rep.f1[0][0] << ", phone->watch " << rep.f1[0][1]
              << ", watch->phone " << rep.f1[1][0] << ", watch->watch " << rep.f1[1][1]
              << '\n';
    return 0;
}

// ---------------------------------------------------------------- synth-gen

int cmd_synth_gen(const std::string& out_dir, int n_subjects, double duration,
                  std::uint64_t seed, bool corrupted, double corrupt_rate,
                  const std::string& device_name) {
    Dataset ds;
    cnn::Rng rng(seed);
    json truth = json::array();
    Device device = device_from_string(device_name);

    for (int s = 0; s < n_subjects; ++s) {
        int subject = 1600 + s;
        for (char activity : kClassActivities) {
            auto arch = synth::Archetype::for_activity(activity);
            auto track = synth::generate(arch, duration, 20.0, rng.next_u64());
            track.key = {subject, activity, device, Sensor::Accel};

            json entry;
            entry["subject"] = subject;
            entry["activity"] = std::string(1, activity);
            if (corrupted) {
                synth::CorruptionSpec spec;
                int label = int(rng.below(4));
                bool facing_in = rng.below(2) != 0;
                spec.schedule = {{0.0,
                                  {orientation::CaseLabel(label),
                                   facing_in ? orientation::ZFacing::In
                                             : orientation::ZFacing::Out}}};
                spec.true_rate_hz = rng.below(2) ? corrupt_rate : 20.0;
                spec.seed = rng.next_u64();
                auto c = synth::corrupt(track, spec);
                c.track.key = track.key;
                track = std::move(c.track);
                entry["case"] = label + 1;
                entry["z_facing_in"] = facing_in;
                entry["rate_hz"] = spec.true_rate_hz;
            }
            truth.push_back(entry);
            ds.tracks.emplace(track.key, std::move(track));
        }
    }
    auto paths = ingest::write_dataset(ds, out_dir);
    write_text(fs::path(out_dir) / "truth.json", truth.dump(2));
    std::cout << "wrote " << ds.tracks.size() << " tracks to " << out_dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wearable sensor repair + activity classification pipeline"};
    app.require_subcommand(1);

    // ------------------------------------------------------------- inspect
    std::vector<std::string> inputs;
    std::string report_path, out_dir;
    bool strict = false;
    auto* inspect = app.add_subcommand("inspect", "per-track counts, rates, orientation");
    inspect->add_option("--in", inputs, "input files or directories")->required();
    inspect->add_option("--report", report_path, "report path (default stdout)");
    inspect->add_flag("--strict", strict, "fail on any malformed line");

    // -------------------------------------------------------------- repair
    double target_hz = 20.0, repair_window_s = 10.0;
    auto* repair = app.add_subcommand("repair", "resample + reorient all tracks");
    repair->add_option("--in", inputs, "input files or directories")->required();
    repair->add_option("--out", out_dir, "output directory")->required();
    repair->add_option("--target-hz", target_hz, "target sampling rate");
    repair->add_option("--repair-window", repair_window_s, "repair window seconds");

    // ------------------------------------------------------------ resample
    auto* resample_cmd = app.add_subcommand("resample", "resample only, no reorientation");
    resample_cmd->add_option("--in", inputs)->required();
    resample_cmd->add_option("--out", out_dir)->required();
    resample_cmd->add_option("--target-hz", target_hz);

    // ---------------------------------------------------------- preprocess
    preprocess::WindowParams params;
    std::uint64_t seed = 0;
    std::vector<std::size_t> split_sizes = {41, 5, 5};
    auto* prep = app.add_subcommand("preprocess", "trim + window into train-ready sets");
    prep->add_option("--in", inputs)->required();
    prep->add_option("--out", out_dir)->required();
    prep->add_option("--trim", params.trim_seconds, "seconds trimmed from track start");
    prep->add_option("--window", params.window_seconds, "window seconds");
    prep->add_option("--stride", params.stride_seconds, "stride seconds");
    prep->add_option("--rate", params.rate_hz, "sample rate of the input tracks");
    prep->add_option("--seed", seed);
    prep->add_option("--split", split_sizes, "train/val/test subject counts")->expected(3);

    // --------------------------------------------------------------- train
    std::string windows_path, ckpt_path = "model.ckpt", curve_path;
    std::size_t epochs = 100, batch = 64;
    double lr = 0.01;
    auto* train_cmd = app.add_subcommand("train", "train the classifier");
    train_cmd->add_option("--windows", windows_path)->required();
    train_cmd->add_option("--out", ckpt_path, "checkpoint path");
    train_cmd->add_option("--curve", curve_path, "per-epoch CSV path");
    train_cmd->add_option("--epochs", epochs);
    train_cmd->add_option("--batch", batch);
    train_cmd->add_option("--lr", lr);
    train_cmd->add_option("--seed", seed);

    // ------------------------------------------------------------ evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "micro-F1 of a checkpoint on a set");
    eval_cmd->add_option("--model", ckpt_path)->required();
    eval_cmd->add_option("--windows", windows_path)->required();

    // ---------------------------------------------------------- cross-eval
    std::string phone_path, watch_path;
    bool loo = false;
    auto* cross = app.add_subcommand("cross-eval", "2x2 cross-hardware table");
    cross->add_option("--phone", phone_path)->required();
    cross->add_option("--watch", watch_path)->required();
    cross->add_option("--report", report_path);
    cross->add_option("--epochs", epochs);
    cross->add_option("--batch", batch);
    cross->add_option("--lr", lr);
    cross->add_option("--seed", seed);
    cross->add_flag("--loo", loo, "leave-one-subject-out diagonal cells");

    // ----------------------------------------------------------- synth-gen
    int n_subjects = 8;
    double duration = 60.0;
    bool corrupted = false;
    double corrupt_rate = 50.0;
    std::string device_name = "phone";
    auto* synth_cmd = app.add_subcommand("synth-gen", "generate a synthetic corpus");
    synth_cmd->add_option("--out", out_dir)->required();
    synth_cmd->add_option("--subjects", n_subjects);
    synth_cmd->add_option("--duration", duration, "seconds per track");
    synth_cmd->add_option("--seed", seed);
    synth_cmd->add_flag("--corrupt", corrupted, "inject orientation + rate defects");
    synth_cmd->add_option("--corrupt-rate", corrupt_rate, "true rate of corrupted tracks");
    synth_cmd->add_option("--device", device_name, "device label: phone or watch");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*inspect) return cmd_inspect(inputs, report_path, strict);
        if (*repair) return cmd_repair(inputs, out_dir, target_hz, repair_window_s);
        if (*resample_cmd) return cmd_resample(inputs, out_dir, target_hz);
        if (*prep) return cmd_preprocess(inputs, out_dir, params, seed, split_sizes);
        if (*train_cmd)
            return cmd_train(windows_path, ckpt_path, curve_path,
                             config_with(epochs, seed, lr, batch));
        if (*eval_cmd) return cmd_evaluate(ckpt_path, windows_path);
        if (*cross) return cmd_cross_eval(phone_path, watch_path, report_path,
                                          config_with(epochs, seed, lr, batch), loo);
        if (*synth_cmd)
            return cmd_synth_gen(out_dir, n_subjects, duration, seed, corrupted,
                                 corrupt_rate, device_name);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
