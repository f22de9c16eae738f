#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>

#include "har/cnn/model.hpp"
#include "har/preprocess.hpp"

namespace har::cnn {

struct EmptyTrainingSet : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptySet : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ClassMapMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EpochStats {
    double loss = 0;
    double accuracy = 0;
    double val_loss = 0;
    double val_accuracy = 0;
};

struct TrainResult {
    std::unique_ptr<CnnModel> model;
    std::vector<EpochStats> curve;

    std::string curve_csv() const;
};

// SGD with momentum for cfg.epochs over shuffled minibatches; fully
// deterministic for a fixed cfg.seed.
TrainResult train(const CnnConfig& cfg, const preprocess::WindowSet& train_set,
                  const preprocess::WindowSet* validation = nullptr);

struct Evaluation {
    double micro_f1 = 0;
    double accuracy = 0;  // equals micro_f1 for single-label multiclass
    std::array<std::array<std::size_t, 5>, 5> confusion{};  // [true][pred]

    std::size_t total() const;
};

Evaluation evaluate(CnnModel& model, const preprocess::WindowSet& ws);

// Fills micro_f1/accuracy from pooled TP/FP/FN of a confusion matrix.
Evaluation metrics_from_confusion(const std::array<std::array<std::size_t, 5>, 5>& confusion);

struct EvalReport {
    // [train_device][test_device], indexed Phone=0, Watch=1.
    double f1[2][2] = {{0, 0}, {0, 0}};
    Evaluation cells[2][2];
    std::vector<std::pair<int, double>> loo_scores[2];  // per-subject, diagonal cells

    std::string to_csv() const;
};

// Diagonal cells by leave-one-subject-out averaging; off-diagonal cells
// train on all subjects of one device and test on all of the other.
// loo_diagonal=false replaces leave-one-out with a single train/test run
// on a subject split (fast path for experiments).
EvalReport cross_eval(const preprocess::WindowSet& phone, const preprocess::WindowSet& watch,
                      const CnnConfig& cfg, bool loo_diagonal = true);

}  // namespace har::cnn
