#include <benchmark/benchmark.h>

#include "radfit/learners.hpp"
#include "radfit/preprocess.hpp"
#include "radfit/rng.hpp"

namespace {

void BM_ResampleLinear(benchmark::State& state) {
    radfit::Rng rng(7);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < 300; ++i) {
        xs.push_back(6.0e9 * static_cast<double>(i) / 299.0);
        ys.push_back(0.6 + 0.01 * rng.normal());
    }
    auto grid = radfit::build_benchmark_grid(radfit::GridAxis::Fluence, 0.0, 6.0e9, 241,
                                             radfit::GridSpacing::Linear);
    for (auto _ : state) {
        auto out = radfit::resample_to_grid(xs, ys, grid, radfit::InterpMethod::PiecewiseLinear);
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_ResampleLinear);

void BM_TrainBoosting(benchmark::State& state) {
    radfit::Rng rng(11);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 240; ++i) {
        std::vector<double> row;
        for (int j = 0; j < 20; ++j) row.push_back(rng.normal());
        x.push_back(row);
        y.push_back(row[0] + 0.5 * row[1] > 0.0 ? 1.0 : 0.0);
    }
    radfit::BoostOptions opt{radfit::BoostLoss::Logistic, 50, 0.1, 3, 1};
    for (auto _ : state) {
        auto model = radfit::train_gradient_boosting(x, y, opt, 3);
        benchmark::DoNotOptimize(model);
    }
}
BENCHMARK(BM_TrainBoosting);

}  // namespace

BENCHMARK_MAIN();
