// Compares the serial reference kernels against the OpenMP/FFT production
// paths on representative field sizes.

#include <benchmark/benchmark.h>

#include "peclab/fieldkernel.hpp"
#include "peclab/rng.hpp"
#include "peclab/virtualfab.hpp"

using namespace peclab;

namespace {

RasterGrid make_field(int n) {
    SplitMix64 rng(42);
    RasterGrid f(n, n, 5.0);
    for (double& v : f.values) v = rng.next_double();
    return f;
}

const Kernel& bench_kernel() {
    static const Kernel k = make_psf_kernel(PsfParams{30, 100, 5}, 5.0);  // radius 60 px
    return k;
}

void BM_convolve_direct_serial(benchmark::State& state) {
    const RasterGrid f = make_field(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(convolve_direct(f, bench_kernel()));
    }
}
BENCHMARK(BM_convolve_direct_serial)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_convolve_direct_openmp(benchmark::State& state) {
    const RasterGrid f = make_field(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(convolve_direct_parallel(f, bench_kernel()));
    }
}
BENCHMARK(BM_convolve_direct_openmp)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_convolve_fft(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const RasterGrid f = make_field(n);
    const ConvolutionPlan plan(n, n, bench_kernel());
    for (auto _ : state) {
        benchmark::DoNotOptimize(plan.apply(f));
    }
}
BENCHMARK(BM_convolve_fft)->Arg(64)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_sweep_labeling_serial(benchmark::State& state) {
    const FabModel fab;
    FactorBounds bounds;
    const auto pts = latin_hypercube_sample(bounds, state.range(0), 7);
    for (auto _ : state) {
        long wells = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            wells += is_yield(process_response(fab, pts[i], mix_u64(7, i)));
        }
        benchmark::DoNotOptimize(wells);
    }
}
BENCHMARK(BM_sweep_labeling_serial)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_sweep_labeling_openmp(benchmark::State& state) {
    const FabModel fab;
    FactorBounds bounds;
    const auto pts = latin_hypercube_sample(bounds, state.range(0), 7);
    for (auto _ : state) {
        long wells = 0;
#pragma omp parallel for reduction(+ : wells) schedule(static)
        for (std::size_t i = 0; i < pts.size(); ++i) {
            wells += is_yield(process_response(fab, pts[i], mix_u64(7, i)));
        }
        benchmark::DoNotOptimize(wells);
    }
}
BENCHMARK(BM_sweep_labeling_openmp)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
