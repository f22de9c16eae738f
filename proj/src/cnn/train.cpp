#include "har/cnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace har::cnn {

namespace {

std::vector<int> labels_of(const std::vector<const preprocess::Window*>& batch) {
    std::vector<int> labels;
    labels.reserve(batch.size());
    for (const auto* w : batch) labels.push_back(w->label);
    return labels;
}

std::size_t argmax_row(const Tensor& probs, std::size_t row) {
    const std::size_t C = probs.shape[1];
    const double* p = probs.data.data() + row * C;
    return std::size_t(std::max_element(p, p + C) - p);
}

struct BatchMetrics {
    double loss = 0;
    std::size_t correct = 0;
};

BatchMetrics eval_pass(CnnModel& model, const preprocess::WindowSet& ws,
                       std::size_t batch_size) {
    BatchMetrics m;
    double loss_sum = 0;
    for (std::size_t start = 0; start < ws.windows.size(); start += batch_size) {
        std::size_t end = std::min(ws.windows.size(), start + batch_size);
        std::vector<const preprocess::Window*> batch;
        for (std::size_t i = start; i < end; ++i) batch.push_back(&ws.windows[i]);
        Tensor probs = model.forward(batch_from_windows(batch), Mode::Infer);
        auto labels = labels_of(batch);
        loss_sum += cross_entropy(probs, labels) * double(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i)
            if (int(argmax_row(probs, i)) == labels[i]) ++m.correct;
    }
    m.loss = loss_sum / double(ws.windows.size());
    return m;
}

}  // namespace

std::string TrainResult::curve_csv() const {
    std::ostringstream os;
    os << "epoch,loss,accuracy,val_loss,val_accuracy\n";
    for (std::size_t e = 0; e < curve.size(); ++e)
        os << e + 1 << ',' << curve[e].loss << ',' << curve[e].accuracy << ','
           << curve[e].val_loss << ',' << curve[e].val_accuracy << '\n';
    return os.str();
}

TrainResult train(const CnnConfig& cfg, const preprocess::WindowSet& train_set,
                  const preprocess::WindowSet* validation) {
    if (train_set.windows.empty()) throw EmptyTrainingSet("train: empty training set");

    TrainResult result;
    result.model = std::make_unique<CnnModel>(cfg);
    CnnModel& model = *result.model;

    // Separate streams so shuffling, dropout, and init are independently
    // reproducible.
    Rng shuffle_rng(cfg.seed ^ 0x5eed0001);
    Rng dropout_rng(cfg.seed ^ 0x5eed0002);

    auto params = model.params();
    auto grads = model.grads();
    std::vector<Tensor> velocity;
    velocity.reserve(params.size());
    for (auto* p : params) velocity.emplace_back(p->shape);

    std::vector<std::size_t> order(train_set.windows.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);

        double loss_sum = 0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<const preprocess::Window*> batch;
            for (std::size_t i = start; i < end; ++i)
                batch.push_back(&train_set.windows[order[i]]);

            Tensor probs = model.forward(batch_from_windows(batch), Mode::Train, &dropout_rng);
            auto labels = labels_of(batch);
            double loss = model.backward(probs, labels);
            loss_sum += loss * double(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i)
                if (int(argmax_row(probs, i)) == labels[i]) ++correct;

            for (std::size_t p = 0; p < params.size(); ++p) {
                auto& v = velocity[p];
                auto& g = *grads[p];
                auto& w = *params[p];
                for (std::size_t j = 0; j < w.size(); ++j) {
                    v[j] = cfg.momentum * v[j] - cfg.learning_rate * g[j];
                    w[j] += v[j];
                }
            }
        }

        EpochStats stats;
        stats.loss = loss_sum / double(order.size());
        stats.accuracy = double(correct) / double(order.size());
        if (validation && !validation->windows.empty()) {
            auto vm = eval_pass(model, *validation, cfg.batch_size);
            stats.val_loss = vm.loss;
            stats.val_accuracy = double(vm.correct) / double(validation->windows.size());
        }
        result.curve.push_back(stats);
    }
    return result;
}

std::size_t Evaluation::total() const {
    std::size_t n = 0;
    for (const auto& row : confusion)
        for (auto v : row) n += v;
    return n;
}

Evaluation metrics_from_confusion(
    const std::array<std::array<std::size_t, 5>, 5>& confusion) {
    Evaluation ev;
    ev.confusion = confusion;
    // Micro-average F1 from pooled per-class counts. For single-label
    // multiclass, pooled FP == pooled FN, so this equals accuracy.
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t c = 0; c < 5; ++c) {
        for (std::size_t k = 0; k < 5; ++k) {
            if (k == c) continue;
            fn += ev.confusion[c][k];
            fp += ev.confusion[k][c];
        }
        tp += ev.confusion[c][c];
    }
    double precision = tp + fp ? double(tp) / double(tp + fp) : 0.0;
    double recall = tp + fn ? double(tp) / double(tp + fn) : 0.0;
    ev.micro_f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
    ev.accuracy = ev.total() ? double(tp) / double(ev.total()) : 0.0;
    return ev;
}

Evaluation evaluate(CnnModel& model, const preprocess::WindowSet& ws) {
    if (ws.windows.empty()) throw EmptySet("evaluate: empty window set");

    Evaluation ev;
    const std::size_t batch_size = model.config().batch_size;
    for (std::size_t start = 0; start < ws.windows.size(); start += batch_size) {
        std::size_t end = std::min(ws.windows.size(), start + batch_size);
        std::vector<const preprocess::Window*> batch;
        for (std::size_t i = start; i < end; ++i) batch.push_back(&ws.windows[i]);
        Tensor probs = model.forward(batch_from_windows(batch), Mode::Infer);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            int truth = batch[i]->label;
            int pred = int(argmax_row(probs, i));
            ++ev.confusion[std::size_t(truth)][std::size_t(pred)];
        }
    }

    return metrics_from_confusion(ev.confusion);
}

std::string EvalReport::to_csv() const {
    std::ostringstream os;
    os << "train_device,test_phone_f1,test_watch_f1\n";
    os << "phone," << f1[0][0] << ',' << f1[0][1] << '\n';
    os << "watch," << f1[1][0] << ',' << f1[1][1] << '\n';
    for (int tr = 0; tr < 2; ++tr)
        for (int te = 0; te < 2; ++te) {
            os << "confusion," << (tr ? "watch" : "phone") << "->" << (te ? "watch" : "phone")
               << '\n';
            for (const auto& row : cells[tr][te].confusion) {
                for (std::size_t k = 0; k < row.size(); ++k)
                    os << row[k] << (k + 1 < row.size() ? ',' : '\n');
            }
        }
    return os.str();
}

namespace {

// Diagonal cell: leave-one-subject-out average on one device's data.
Evaluation loo_cell(const preprocess::WindowSet& ws, const CnnConfig& cfg,
                    std::vector<std::pair<int, double>>& per_subject) {
    auto plans = preprocess::leave_one_out(ws.subjects());
    Evaluation pooled;
    double f1_sum = 0;
    for (const auto& plan : plans) {
        auto train_ws = preprocess::filter_by_subjects(ws, plan.train);
        auto test_ws = preprocess::filter_by_subjects(ws, plan.test);
        if (test_ws.windows.empty()) continue;
        auto tr = train(cfg, train_ws);
        auto ev = evaluate(*tr.model, test_ws);
        per_subject.emplace_back(plan.test[0], ev.micro_f1);
        f1_sum += ev.micro_f1;
        for (std::size_t c = 0; c < 5; ++c)
            for (std::size_t k = 0; k < 5; ++k) pooled.confusion[c][k] += ev.confusion[c][k];
    }
    pooled.micro_f1 = per_subject.empty() ? 0.0 : f1_sum / double(per_subject.size());
    pooled.accuracy = pooled.micro_f1;
    return pooled;
}

// Fast diagonal cell: one subject-split train/test run.
Evaluation split_cell(const preprocess::WindowSet& ws, const CnnConfig& cfg) {
    auto subjects = ws.subjects();
    std::size_t n_test = std::max<std::size_t>(1, subjects.size() / 5);
    auto plan = preprocess::make_split(subjects, subjects.size() - n_test, 0, n_test,
                                       cfg.seed);
    auto tr = train(cfg, preprocess::filter_by_subjects(ws, plan.train));
    return evaluate(*tr.model, preprocess::filter_by_subjects(ws, plan.test));
}

}  // namespace

EvalReport cross_eval(const preprocess::WindowSet& phone, const preprocess::WindowSet& watch,
                      const CnnConfig& cfg, bool loo_diagonal) {
    if (phone.windows.empty() || watch.windows.empty())
        throw EmptySet("cross_eval: empty window set");
    if (phone.length != watch.length)
        throw ClassMapMismatch("cross_eval: window lengths differ");

    EvalReport rep;
    const preprocess::WindowSet* sets[2] = {&phone, &watch};

    for (int tr_dev = 0; tr_dev < 2; ++tr_dev) {
        // diagonal
        if (loo_diagonal) {
            rep.cells[tr_dev][tr_dev] = loo_cell(*sets[tr_dev], cfg, rep.loo_scores[tr_dev]);
        } else {
            rep.cells[tr_dev][tr_dev] = split_cell(*sets[tr_dev], cfg);
        }
        rep.f1[tr_dev][tr_dev] = rep.cells[tr_dev][tr_dev].micro_f1;

        // off-diagonal: all subjects on both sides
        auto trained = train(cfg, *sets[tr_dev]);
        int te_dev = 1 - tr_dev;
        rep.cells[tr_dev][te_dev] = evaluate(*trained.model, *sets[te_dev]);
        rep.f1[tr_dev][te_dev] = rep.cells[tr_dev][te_dev].micro_f1;
    }
    return rep;
}

}  // namespace har::cnn
