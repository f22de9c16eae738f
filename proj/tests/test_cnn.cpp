#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "har/cnn/checkpoint.hpp"
#include "har/cnn/kernels.hpp"
#include "har/cnn/layers.hpp"
#include "har/cnn/model.hpp"
#include "har/cnn/train.hpp"
#include "har/synth.hpp"

using namespace har;
using namespace har::cnn;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double std = 1.0) {
    Tensor t(std::move(shape));
    for (auto& v : t.data) v = rng.normal(0, std);
    return t;
}

// Central finite differences of a scalar loss wrt every tensor entry.
template <typename LossFn>
double max_rel_grad_error(const std::vector<Tensor*>& params,
                          const std::vector<Tensor*>& grads, LossFn loss, double h = 1e-6) {
    double worst = 0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t i = 0; i < params[p]->size(); ++i) {
            double saved = (*params[p])[i];
            (*params[p])[i] = saved + h;
            double lp = loss();
            (*params[p])[i] = saved - h;
            double lm = loss();
            (*params[p])[i] = saved;
            double fd = (lp - lm) / (2 * h);
            double an = (*grads[p])[i];
            double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
            worst = std::max(worst, std::abs(fd - an) / denom);
        }
    }
    return worst;
}

preprocess::WindowSet tiny_windowset(std::size_t per_class, std::size_t length,
                                     std::uint64_t seed) {
    preprocess::WindowSet ws;
    ws.length = length;
    Rng rng(seed);
    for (int label = 0; label < 5; ++label) {
        auto arch = synth::Archetype::for_activity(kClassActivities[label]);
        for (std::size_t i = 0; i < per_class; ++i) {
            auto track = synth::generate(arch, double(length) / 20.0 + 1.0, 20.0,
                                         rng.next_u64());
            preprocess::Window w;
            w.label = label;
            w.subject = int(1600 + i);
            w.values.resize(3 * length);
            std::copy_n(track.x.begin(), length, w.values.begin());
            std::copy_n(track.y.begin(), length, w.values.begin() + std::ptrdiff_t(length));
            std::copy_n(track.z.begin(), length,
                        w.values.begin() + std::ptrdiff_t(2 * length));
            ws.windows.push_back(std::move(w));
        }
    }
    return ws;
}

CnnConfig shrunken_config() {
    CnnConfig cfg;
    cfg.input_length = 16;
    cfg.filters = {4, 6, 8};
    cfg.hidden = 10;
    cfg.dropout = 0.0;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("omp kernels match serial reference bitwise") {
    Rng rng(1);
    const std::size_t B = 3, Cin = 4, Cout = 5, L = 17, K = 5;
    auto in = random_tensor({B, Cin, L}, rng);
    auto w = random_tensor({Cout, Cin, K}, rng);
    auto b = random_tensor({Cout}, rng);

    Tensor out_s({B, Cout, L}), out_p({B, Cout, L});
    kernels::conv1d_forward_serial(out_s.data.data(), in.data.data(), w.data.data(),
                                   b.data.data(), B, Cin, Cout, L, K);
    kernels::conv1d_forward(out_p.data.data(), in.data.data(), w.data.data(), b.data.data(),
                            B, Cin, Cout, L, K);
    CHECK(out_s.data == out_p.data);

    auto gout = random_tensor({B, Cout, L}, rng);
    Tensor gin_s({B, Cin, L}), gin_p({B, Cin, L});
    kernels::conv1d_backward_input_serial(gin_s.data.data(), gout.data.data(), w.data.data(),
                                          B, Cin, Cout, L, K);
    kernels::conv1d_backward_input(gin_p.data.data(), gout.data.data(), w.data.data(), B,
                                   Cin, Cout, L, K);
    CHECK(gin_s.data == gin_p.data);

    Tensor gw_s({Cout, Cin, K}), gw_p({Cout, Cin, K}), gb_s({Cout}), gb_p({Cout});
    kernels::conv1d_backward_params_serial(gw_s.data.data(), gb_s.data.data(), in.data.data(),
                                           gout.data.data(), B, Cin, Cout, L, K);
    kernels::conv1d_backward_params(gw_p.data.data(), gb_p.data.data(), in.data.data(),
                                    gout.data.data(), B, Cin, Cout, L, K);
    CHECK(gw_s.data == gw_p.data);
    CHECK(gb_s.data == gb_p.data);

    const std::size_t N = 13, M = 7;
    auto din = random_tensor({B, N}, rng);
    auto dw = random_tensor({M, N}, rng);
    auto db = random_tensor({M}, rng);
    Tensor dout_s({B, M}), dout_p({B, M});
    kernels::dense_forward_serial(dout_s.data.data(), din.data.data(), dw.data.data(),
                                  db.data.data(), B, N, M);
    kernels::dense_forward(dout_p.data.data(), din.data.data(), dw.data.data(),
                           db.data.data(), B, N, M);
    CHECK(dout_s.data == dout_p.data);
}

TEST_CASE("conv1d gradient check") {
    Rng rng(2);
    Conv1d conv(3, 4, 5);
    conv.init_params(rng);
    auto in = random_tensor({2, 3, 12}, rng);
    auto target = random_tensor({2, 4, 12}, rng);

    auto loss = [&] {
        Conv1d& c = conv;
        Tensor out = c.forward(in, Mode::Train);
        double l = 0;
        for (std::size_t i = 0; i < out.size(); ++i)
            l += 0.5 * (out[i] - target[i]) * (out[i] - target[i]);
        return l;
    };

    Tensor out = conv.forward(in, Mode::Train);
    Tensor gout(out.shape);
    for (std::size_t i = 0; i < out.size(); ++i) gout[i] = out[i] - target[i];
    conv.backward(gout);

    CHECK(max_rel_grad_error(conv.params(), conv.grads(), loss) < 1e-4);
}

TEST_CASE("batchnorm gradient check (train mode)") {
    Rng rng(3);
    BatchNorm bn(3);
    // nudge gamma/beta off the identity
    for (auto* p : bn.params())
        for (auto& v : p->data) v += rng.normal(0, 0.1);
    auto in = random_tensor({4, 3, 8}, rng, 2.0);
    auto target = random_tensor({4, 3, 8}, rng);

    auto loss = [&] {
        BatchNorm copy = bn;  // avoid running-stat drift across calls
        Tensor out = copy.forward(in, Mode::Train);
        double l = 0;
        for (std::size_t i = 0; i < out.size(); ++i)
            l += 0.5 * (out[i] - target[i]) * (out[i] - target[i]);
        return l;
    };

    BatchNorm work = bn;
    Tensor out = work.forward(in, Mode::Train);
    Tensor gout(out.shape);
    for (std::size_t i = 0; i < out.size(); ++i) gout[i] = out[i] - target[i];
    work.backward(gout);

    CHECK(max_rel_grad_error(bn.params(), work.grads(), loss) < 1e-4);
}

TEST_CASE("batchnorm input gradient check") {
    Rng rng(4);
    auto in = random_tensor({3, 2, 6}, rng, 1.5);
    auto target = random_tensor({3, 2, 6}, rng);

    auto loss_at = [&](const Tensor& input) {
        BatchNorm bn(2);
        Tensor out = bn.forward(input, Mode::Train);
        double l = 0;
        for (std::size_t i = 0; i < out.size(); ++i)
            l += 0.5 * (out[i] - target[i]) * (out[i] - target[i]);
        return l;
    };

    BatchNorm bn(2);
    Tensor out = bn.forward(in, Mode::Train);
    Tensor gout(out.shape);
    for (std::size_t i = 0; i < out.size(); ++i) gout[i] = out[i] - target[i];
    Tensor gin = bn.backward(gout);

    const double h = 1e-6;
    double worst = 0;
    for (std::size_t i = 0; i < in.size(); ++i) {
        double saved = in[i];
        in[i] = saved + h;
        double lp = loss_at(in);
        in[i] = saved - h;
        double lm = loss_at(in);
        in[i] = saved;
        double fd = (lp - lm) / (2 * h);
        double denom = std::max({std::abs(fd), std::abs(gin[i]), 1e-8});
        worst = std::max(worst, std::abs(fd - gin[i]) / denom);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("dense gradient check") {
    Rng rng(5);
    Dense fc(9, 4);
    fc.init_params(rng);
    auto in = random_tensor({3, 9}, rng);
    auto target = random_tensor({3, 4}, rng);

    auto loss = [&] {
        Tensor out = fc.forward(in, Mode::Train);
        double l = 0;
        for (std::size_t i = 0; i < out.size(); ++i)
            l += 0.5 * (out[i] - target[i]) * (out[i] - target[i]);
        return l;
    };

    Tensor out = fc.forward(in, Mode::Train);
    Tensor gout(out.shape);
    for (std::size_t i = 0; i < out.size(); ++i) gout[i] = out[i] - target[i];
    fc.backward(gout);
    CHECK(max_rel_grad_error(fc.params(), fc.grads(), loss) < 1e-4);
}

TEST_CASE("maxpool and relu backward route gradients correctly") {
    // FD check through relu+pool composed with a fixed linear readout.
    Rng rng(6);
    auto in = random_tensor({2, 2, 8}, rng);
    auto coeff = random_tensor({2, 2, 4}, rng);

    auto loss_at = [&](const Tensor& input) {
        Relu relu;
        MaxPool1d pool(2);
        Tensor out = pool.forward(relu.forward(input, Mode::Train), Mode::Train);
        double l = 0;
        for (std::size_t i = 0; i < out.size(); ++i) l += coeff[i] * out[i];
        return l;
    };

    Relu relu;
    MaxPool1d pool(2);
    Tensor out = pool.forward(relu.forward(in, Mode::Train), Mode::Train);
    Tensor gout(out.shape);
    for (std::size_t i = 0; i < out.size(); ++i) gout[i] = coeff[i];
    Tensor gin = relu.backward(pool.backward(gout));

    const double h = 1e-6;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (std::abs(in[i]) < 1e-3) continue;  // kink of relu / pool ties
        double saved = in[i];
        in[i] = saved + h;
        double lp = loss_at(in);
        in[i] = saved - h;
        double lm = loss_at(in);
        in[i] = saved;
        double fd = (lp - lm) / (2 * h);
        CHECK(std::abs(fd - gin[i]) <
              1e-4 * std::max({std::abs(fd), std::abs(gin[i]), 1.0}));
    }
}

TEST_CASE("dropout layer gradient check with fixed mask") {
    Rng rng(7);
    Dropout drop(0.5);
    auto in = random_tensor({3, 10}, rng);
    auto coeff = random_tensor({3, 10}, rng);

    Rng mask_rng(8);
    Tensor out = drop.forward(in, Mode::Train, mask_rng);
    Tensor gout(out.shape);
    for (std::size_t i = 0; i < out.size(); ++i) gout[i] = coeff[i];
    Tensor gin = drop.backward(gout);

    auto loss_at = [&](const Tensor& input) {
        Tensor o = drop.forward_with_last_mask(input, Mode::Train);
        double l = 0;
        for (std::size_t i = 0; i < o.size(); ++i) l += coeff[i] * o[i];
        return l;
    };
    const double h = 1e-6;
    for (std::size_t i = 0; i < in.size(); ++i) {
        double saved = in[i];
        in[i] = saved + h;
        double lp = loss_at(in);
        in[i] = saved - h;
        double lm = loss_at(in);
        in[i] = saved;
        double fd = (lp - lm) / (2 * h);
        CHECK(std::abs(fd - gin[i]) < 1e-6);
    }
}

TEST_CASE("full-stack gradient check on a shrunken config") {
    auto cfg = shrunken_config();
    CnnModel model(cfg);
    Rng rng(9);
    Tensor batch = random_tensor({4, 3, cfg.input_length}, rng, 2.0);
    std::vector<int> labels = {0, 2, 4, 1};

    Tensor probs = model.forward(batch, Mode::Train);
    model.backward(probs, labels);

    auto loss = [&] {
        Tensor p = model.forward_fixed_dropout(batch, Mode::Train);
        return cross_entropy(p, labels);
    };
    CHECK(max_rel_grad_error(model.params(), model.grads(), loss) < 1e-4);
}

TEST_CASE("forward outputs live on the probability simplex") {
    CnnConfig cfg;
    cfg.seed = 11;
    CnnModel model(cfg);
    Rng rng(12);
    Tensor batch = random_tensor({6, 3, 100}, rng, 5.0);
    Tensor probs = model.forward(batch, Mode::Infer);
    REQUIRE((probs.shape == std::vector<std::size_t>{6, 5}));
    for (std::size_t n = 0; n < 6; ++n) {
        double sum = 0;
        for (std::size_t c = 0; c < 5; ++c) {
            CHECK(probs.at2(n, c) >= 0.0);
            sum += probs.at2(n, c);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("zero final layer gives uniform probabilities") {
    auto cfg = shrunken_config();
    CnnModel model(cfg);
    auto params = model.params();
    // last two tensors are fc2 weight and bias
    params[params.size() - 2]->zero();
    params[params.size() - 1]->zero();
    Rng rng(13);
    Tensor batch = random_tensor({3, 3, cfg.input_length}, rng);
    Tensor probs = model.forward(batch, Mode::Infer);
    for (double p : probs.data) CHECK(p == doctest::Approx(0.2).epsilon(1e-9));
}

TEST_CASE("infer mode is a pure function") {
    CnnConfig cfg;
    cfg.seed = 14;
    CnnModel model(cfg);
    Rng rng(15);
    Tensor batch = random_tensor({4, 3, 100}, rng);
    auto a = model.forward(batch, Mode::Infer);
    auto b = model.forward(batch, Mode::Infer);
    CHECK(a.data == b.data);
}

TEST_CASE("cross-entropy reference values") {
    Tensor probs({2, 5});
    // perfectly confident and correct
    probs.at2(0, 1) = 1.0;
    probs.at2(1, 3) = 1.0;
    CHECK(cross_entropy(probs, {1, 3}) < 1e-6);

    Tensor uniform({1, 5});
    for (auto& v : uniform.data) v = 0.2;
    CHECK(cross_entropy(uniform, {2}) == doctest::Approx(std::log(5.0)).epsilon(1e-9));
}

TEST_CASE("shape mismatches are rejected") {
    auto cfg = shrunken_config();
    CnnModel model(cfg);
    Tensor bad({2, 3, cfg.input_length + 1});
    CHECK_THROWS_AS(model.forward(bad, Mode::Infer), ShapeMismatch);
    Tensor batch({2, 3, cfg.input_length});
    Tensor probs = model.forward(batch, Mode::Infer);
    CHECK_THROWS_AS(model.backward(probs, {0}), ShapeMismatch);
}

TEST_CASE("training is deterministic for a fixed seed") {
    auto cfg = shrunken_config();
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.seed = 99;
    auto ws = tiny_windowset(4, cfg.input_length, 123);

    auto a = train(cfg, ws);
    auto b = train(cfg, ws);
    auto pa = a.model->params();
    auto pb = b.model->params();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
    CHECK(a.curve.back().loss == b.curve.back().loss);
}

TEST_CASE("learning rate zero leaves parameters unchanged") {
    auto cfg = shrunken_config();
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.0;
    auto ws = tiny_windowset(3, cfg.input_length, 7);

    CnnModel reference(cfg);
    auto result = train(cfg, ws);
    auto pa = result.model->params();
    auto pb = reference.params();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
}

TEST_CASE("empty training set is rejected") {
    preprocess::WindowSet empty;
    empty.length = 16;
    CHECK_THROWS_AS(train(shrunken_config(), empty), EmptyTrainingSet);
}

TEST_CASE("training loss decreases on the overfit set") {
    auto cfg = shrunken_config();
    cfg.epochs = 40;
    cfg.batch_size = 8;
    cfg.learning_rate = 0.02;
    cfg.seed = 1;
    auto ws = tiny_windowset(4, cfg.input_length, 55);
    auto result = train(cfg, ws);
    CHECK(result.curve.back().loss < result.curve.front().loss);
}

TEST_CASE("micro-F1 from pooled counts: perfect, zero, and mixed") {
    std::array<std::array<std::size_t, 5>, 5> confusion{};

    for (std::size_t c = 0; c < 5; ++c) confusion[c][c] = 7;
    CHECK(metrics_from_confusion(confusion).micro_f1 == doctest::Approx(1.0));

    confusion = {};
    for (std::size_t c = 0; c < 5; ++c) confusion[c][(c + 1) % 5] = 7;
    CHECK(metrics_from_confusion(confusion).micro_f1 == doctest::Approx(0.0));

    // diag (10,...,10) plus 10 off-diagonal; brute-force pooled counts
    confusion = {};
    for (std::size_t c = 0; c < 5; ++c) confusion[c][c] = 10;
    confusion[0][1] += 10;
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t c = 0; c < 5; ++c)
        for (std::size_t k = 0; k < 5; ++k) {
            if (c == k) tp += confusion[c][k];
            else { fn += confusion[c][k]; fp += confusion[k][c]; }
        }
    double p = double(tp) / double(tp + fp), r = double(tp) / double(tp + fn);
    double expected = 2 * p * r / (p + r);
    auto ev = metrics_from_confusion(confusion);
    CHECK(ev.micro_f1 == doctest::Approx(expected));
    CHECK(ev.micro_f1 == doctest::Approx(50.0 / 60.0));
    CHECK(ev.micro_f1 == doctest::Approx(ev.accuracy));
}

TEST_CASE("micro-F1 equals accuracy and is permutation invariant") {
    auto cfg = shrunken_config();
    cfg.epochs = 5;
    cfg.batch_size = 8;
    auto ws = tiny_windowset(4, cfg.input_length, 19);
    auto result = train(cfg, ws);

    auto ev = evaluate(*result.model, ws);
    CHECK(ev.micro_f1 == doctest::Approx(ev.accuracy).epsilon(1e-12));
    CHECK(ev.total() == ws.windows.size());

    // shuffle and re-evaluate
    preprocess::WindowSet shuffled = ws;
    Rng rng(77);
    for (std::size_t i = shuffled.windows.size(); i > 1; --i)
        std::swap(shuffled.windows[i - 1], shuffled.windows[rng.below(i)]);
    auto ev2 = evaluate(*result.model, shuffled);
    CHECK(ev2.micro_f1 == doctest::Approx(ev.micro_f1).epsilon(1e-12));

    CHECK_THROWS_AS(evaluate(*result.model, preprocess::WindowSet{}), EmptySet);
}

TEST_CASE("checkpoint round-trip preserves parameters and predictions") {
    auto cfg = shrunken_config();
    cfg.epochs = 2;
    cfg.batch_size = 8;
    auto ws = tiny_windowset(3, cfg.input_length, 31);
    auto result = train(cfg, ws);

    auto path = (std::filesystem::temp_directory_path() / "har_ckpt_test.bin").string();
    save_checkpoint(*result.model, path);
    auto loaded = load_checkpoint(path);

    auto pa = result.model->params();
    auto pb = loaded->params();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);

    Rng rng(32);
    Tensor batch = random_tensor({3, 3, cfg.input_length}, rng);
    CHECK(result.model->forward(batch, Mode::Infer).data ==
          loaded->forward(batch, Mode::Infer).data);
}

TEST_CASE("cross_eval on identical sets has matching diagonal and off-diagonal") {
    auto cfg = shrunken_config();
    cfg.epochs = 8;
    cfg.batch_size = 8;
    cfg.seed = 3;
    auto ws = tiny_windowset(4, cfg.input_length, 41);
    preprocess::WindowSet phone = ws, watch = ws;
    for (auto& w : phone.windows) w.device = Device::Phone;
    for (auto& w : watch.windows) w.device = Device::Watch;

    auto rep = cross_eval(phone, watch, cfg, /*loo_diagonal=*/false);
    // identical data: the cross-device penalty vanishes by construction
    CHECK(std::abs(rep.f1[0][1] - rep.f1[1][0]) <= 0.02);
    for (int tr = 0; tr < 2; ++tr)
        for (int te = 0; te < 2; ++te) {
            CHECK(rep.f1[tr][te] >= 0.0);
            CHECK(rep.f1[tr][te] <= 1.0);
        }
    auto csv = rep.to_csv();
    CHECK(csv.find("train_device") != std::string::npos);

    preprocess::WindowSet wrong = watch;
    wrong.length = ws.length + 1;
    CHECK_THROWS_AS(cross_eval(phone, wrong, cfg, false), ClassMapMismatch);
}
