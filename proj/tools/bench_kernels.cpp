// Serial reference vs OpenMP kernels, plus the per-track repair pipeline.

#include <benchmark/benchmark.h>

#include "har/cnn/kernels.hpp"
#include "har/cnn/tensor.hpp"
#include "har/orientation.hpp"
#include "har/resample.hpp"
#include "har/synth.hpp"

using namespace har;
using namespace har::cnn;

namespace {

struct ConvSetup {
    std::size_t B = 64, Cin = 32, Cout = 64, L = 50, K = 5;
    Tensor in, w, b, out, gout, gin, gw, gb;

    ConvSetup() {
        Rng rng(1);
        auto fill = [&](Tensor& t, std::vector<std::size_t> shape) {
            t = Tensor(std::move(shape));
            for (auto& v : t.data) v = rng.normal();
        };
        fill(in, {B, Cin, L});
        fill(w, {Cout, Cin, K});
        fill(b, {Cout});
        fill(gout, {B, Cout, L});
        out = Tensor({B, Cout, L});
        gin = Tensor({B, Cin, L});
        gw = Tensor({Cout, Cin, K});
        gb = Tensor({Cout});
    }
};

ConvSetup& setup() {
    static ConvSetup s;
    return s;
}

void conv_forward_serial(benchmark::State& state) {
    auto& s = setup();
    for (auto _ : state) {
        kernels::conv1d_forward_serial(s.out.data.data(), s.in.data.data(), s.w.data.data(),
                                       s.b.data.data(), s.B, s.Cin, s.Cout, s.L, s.K);
        benchmark::ClobberMemory();
    }
}

void conv_forward_omp(benchmark::State& state) {
    auto& s = setup();
    for (auto _ : state) {
        kernels::conv1d_forward(s.out.data.data(), s.in.data.data(), s.w.data.data(),
                                s.b.data.data(), s.B, s.Cin, s.Cout, s.L, s.K);
        benchmark::ClobberMemory();
    }
}

void conv_backward_serial(benchmark::State& state) {
    auto& s = setup();
    for (auto _ : state) {
        kernels::conv1d_backward_input_serial(s.gin.data.data(), s.gout.data.data(),
                                              s.w.data.data(), s.B, s.Cin, s.Cout, s.L, s.K);
        kernels::conv1d_backward_params_serial(s.gw.data.data(), s.gb.data.data(),
                                               s.in.data.data(), s.gout.data.data(), s.B,
                                               s.Cin, s.Cout, s.L, s.K);
        benchmark::ClobberMemory();
    }
}

void conv_backward_omp(benchmark::State& state) {
    auto& s = setup();
    for (auto _ : state) {
        kernels::conv1d_backward_input(s.gin.data.data(), s.gout.data.data(), s.w.data.data(),
                                       s.B, s.Cin, s.Cout, s.L, s.K);
        kernels::conv1d_backward_params(s.gw.data.data(), s.gb.data.data(), s.in.data.data(),
                                        s.gout.data.data(), s.B, s.Cin, s.Cout, s.L, s.K);
        benchmark::ClobberMemory();
    }
}

void repair_pipeline(benchmark::State& state) {
    auto base = synth::generate(synth::Archetype::for_activity('A'), 180.0, 20.0, 3);
    synth::CorruptionSpec spec;
    spec.schedule = {{0.0, {orientation::CaseLabel::Case3, orientation::ZFacing::Out}}};
    spec.true_rate_hz = 50.0;
    auto corrupted = synth::corrupt(base, spec).track;
    for (auto _ : state) {
        auto t = resample::resample_track(corrupted, 20.0);
        auto log = orientation::repair_track(t, 10.0, 20.0);
        benchmark::DoNotOptimize(log.windows.size());
    }
}

}  // namespace

BENCHMARK(conv_forward_serial);
BENCHMARK(conv_forward_omp);
BENCHMARK(conv_backward_serial);
BENCHMARK(conv_backward_omp);
BENCHMARK(repair_pipeline);

BENCHMARK_MAIN();
