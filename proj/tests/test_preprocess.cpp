#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "radfit/errors.hpp"
#include "radfit/preprocess.hpp"
#include "radfit/rng.hpp"
#include "radfit/synthgen.hpp"
#include "radfit/workflows.hpp"

using namespace radfit;

namespace {

StressTrace make_trace(const std::vector<double>& currents, double spacing = 1e8) {
    StressTrace t;
    t.flux_ncm2s = 1e6;
    for (std::size_t i = 0; i < currents.size(); ++i)
        t.points.push_back({spacing * static_cast<double>(i), currents[i]});
    return t;
}

}  // namespace

TEST_CASE("two point grid is just the endpoints") {
    auto g = build_benchmark_grid(GridAxis::Fluence, 0.0, 6.0e9, 2, GridSpacing::Linear);
    REQUIRE(g.count() == 2);
    CHECK(g.positions[0] == 0.0);
    CHECK(g.positions[1] == 6.0e9);
}

TEST_CASE("61 point fluence grid has step 1e8") {
    auto g = build_benchmark_grid(GridAxis::Fluence, 0.0, 6.0e9, 61, GridSpacing::Linear);
    REQUIRE(g.count() == 61);
    for (std::size_t i = 1; i < 61; ++i)
        CHECK(g.positions[i] - g.positions[i - 1] == doctest::Approx(1.0e8).epsilon(1e-12));
    CHECK(g.positions.back() == 6.0e9);  // endpoint exact, not accumulated
}

TEST_CASE("101 point sweep grid has step 0.1") {
    auto g = build_benchmark_grid(GridAxis::SweepVoltage, -5.0, 5.0, 101, GridSpacing::Linear);
    for (std::size_t i = 1; i < 101; ++i)
        CHECK(g.positions[i] - g.positions[i - 1] == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("grid construction rejects bad arguments") {
    CHECK_THROWS_AS(build_benchmark_grid(GridAxis::Fluence, 0.0, 6.0e9, 1, GridSpacing::Linear),
                    DomainError);
    CHECK_THROWS_AS(build_benchmark_grid(GridAxis::Fluence, 5.0, 1.0, 10, GridSpacing::Linear),
                    DomainError);
    CHECK_THROWS_AS(build_benchmark_grid(GridAxis::Fluence, 0.0, 6.0e9, 10, GridSpacing::Log),
                    DomainError);  // log scale needs positive start
}

TEST_CASE("constant series resamples to constant") {
    auto g = build_benchmark_grid(GridAxis::Fluence, 0.0, 6.0e9, 61, GridSpacing::Linear);
    auto ys = resample_to_grid({0.0, 6.0e9}, {1.0, 1.0}, g, InterpMethod::PiecewiseLinear);
    for (double y : ys) CHECK(y == 1.0);
}

TEST_CASE("linear series resamples linearly") {
    auto g = build_benchmark_grid(GridAxis::Fluence, 0.0, 10.0, 3, GridSpacing::Linear);
    auto ys = resample_to_grid({0.0, 10.0}, {0.0, 10.0}, g, InterpMethod::PiecewiseLinear);
    REQUIRE(ys.size() == 3);
    CHECK(ys[0] == 0.0);
    CHECK(ys[1] == doctest::Approx(5.0));
    CHECK(ys[2] == 10.0);
}

TEST_CASE("padding holds the last recorded current beyond the data") {
    auto g = build_benchmark_grid(GridAxis::Fluence, 0.0, 6.0e9, 61, GridSpacing::Linear);
    std::vector<double> xs, ys;
    for (int i = 0; i <= 40; ++i) {
        xs.push_back(1e8 * i);  // ends at 4e9
        ys.push_back(i == 40 ? 0.8 : 1.0);
    }
    auto out = resample_to_grid(xs, ys, g, InterpMethod::PiecewiseLinear);
    for (std::size_t i = 0; i < g.count(); ++i) {
        if (g.positions[i] > 4e9) CHECK(out[i] == 0.8);
    }
}

TEST_CASE("resampling reproduces observed points exactly") {
    Rng rng(55);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> xs, ys;
        double x = 0.0;
        for (int i = 0; i < 20; ++i) {
            x += rng.uniform(0.1, 1.0);
            xs.push_back(x);
            ys.push_back(rng.normal());
        }
        BenchmarkGrid g;
        g.axis = GridAxis::Fluence;
        g.positions = xs;  // sample at exactly the observed x
        for (auto method : {InterpMethod::PiecewiseLinear, InterpMethod::MonotoneCubic}) {
            auto out = resample_to_grid(xs, ys, g, method);
            for (std::size_t i = 0; i < xs.size(); ++i) CHECK(out[i] == ys[i]);
        }
    }
}

TEST_CASE("resampling is idempotent on grid-aligned data") {
    auto g = build_benchmark_grid(GridAxis::Fluence, 0.0, 100.0, 41, GridSpacing::Linear);
    Rng rng(56);
    std::vector<double> ys;
    for (std::size_t i = 0; i < g.count(); ++i) ys.push_back(rng.uniform(0.0, 2.0));
    auto once = resample_to_grid(g.positions, ys, g, InterpMethod::PiecewiseLinear);
    auto twice = resample_to_grid(g.positions, once, g, InterpMethod::PiecewiseLinear);
    CHECK(once == ys);
    CHECK(twice == once);
}

TEST_CASE("monotone cubic preserves monotonicity") {
    auto g = build_benchmark_grid(GridAxis::Fluence, 0.0, 10.0, 201, GridSpacing::Linear);
    // steep-then-flat data where a natural cubic spline would overshoot
    std::vector<double> xs = {0.0, 1.0, 2.0, 3.0, 8.0, 10.0};
    std::vector<double> ys = {0.0, 0.1, 0.9, 1.0, 1.0, 1.0};
    auto out = resample_to_grid(xs, ys, g, InterpMethod::MonotoneCubic);
    for (std::size_t i = 1; i < out.size(); ++i) CHECK(out[i] >= out[i - 1] - 1e-12);
    CHECK(*std::max_element(out.begin(), out.end()) <= 1.0 + 1e-12);
}

TEST_CASE("duplicate x values collapse by averaging") {
    BenchmarkGrid g;
    g.positions = {1.0, 3.0};
    auto out = resample_to_grid({1.0, 1.0, 3.0}, {2.0, 4.0, 5.0}, g,
                                InterpMethod::PiecewiseLinear);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == doctest::Approx(3.0));
    CHECK(out[1] == doctest::Approx(5.0));
}

TEST_CASE("a single distinct x is a degenerate series") {
    BenchmarkGrid g;
    g.positions = {1.0};
    CHECK_THROWS_AS(resample_to_grid({1.0, 1.0}, {2.0, 4.0}, g, InterpMethod::PiecewiseLinear),
                    DataError);
}

TEST_CASE("constant trace has no point outliers") {
    auto t = make_trace(std::vector<double>(30, 1.0));
    CHECK(point_outlier_indices(t, 5.0, 5).empty());
    CHECK(filter_point_outliers(t, 5.0, 5).points.size() == 30);
}

TEST_CASE("interior spike is removed") {
    std::vector<double> cur(30, 1.0);
    cur[14] = 100.0;
    auto t = make_trace(cur);
    auto removed = point_outlier_indices(t, 5.0, 5);
    REQUIRE(removed.size() == 1);
    CHECK(removed[0] == 14);
}

TEST_CASE("endpoints are never removed") {
    std::vector<double> cur(30, 1.0);
    cur[0] = 100.0;
    cur[29] = 100.0;
    auto t = make_trace(cur);
    CHECK(point_outlier_indices(t, 5.0, 5).empty());
}

TEST_CASE("clean constant trace classifies as no outlier") {
    auto t = make_trace(std::vector<double>(120, 1.0), 5e7);
    OutlierRuleConfig cfg;
    CHECK(!classify_device_outlier(t, cfg).has_value());
}

TEST_CASE("early drastic drop is InstantCurrentDecline") {
    // drops to 40% of baseline at 1% of max fluence (grid end 6e9)
    std::vector<double> cur(300, 0.4);
    for (int i = 0; i < 3; ++i) cur[i] = 1.0;
    auto t = make_trace(cur, 2e7);
    OutlierRuleConfig cfg;
    auto cls = classify_device_outlier(t, cfg);
    REQUIRE(cls.has_value());
    CHECK(*cls == OutlierClass::InstantCurrentDecline);
}

TEST_CASE("near-step decline with no transition samples is LittleDataAtDecline") {
    std::vector<double> cur(300, 1.0);
    for (int i = 150; i < 300; ++i) cur[i] = 0.3;  // no samples between 0.9 and 0.5
    auto t = make_trace(cur, 2e7);
    auto cls = classify_device_outlier(t, OutlierRuleConfig{});
    REQUIRE(cls.has_value());
    CHECK(*cls == OutlierClass::LittleDataAtDecline);
}

TEST_CASE("upward discontinuity is CurrentJump") {
    std::vector<double> cur(300, 1.0);
    for (int i = 150; i < 300; ++i) cur[i] = 3.5;
    auto t = make_trace(cur, 2e7);
    auto cls = classify_device_outlier(t, OutlierRuleConfig{});
    REQUIRE(cls.has_value());
    CHECK(*cls == OutlierClass::CurrentJump);
}

TEST_CASE("baseline outside the band is OddBeginningCurrent") {
    auto t = make_trace(std::vector<double>(120, 30.0), 5e7);
    OutlierRuleConfig cfg = OutlierRuleConfig{}.with_baseline_band(1.0);
    auto cls = classify_device_outlier(t, cfg);
    REQUIRE(cls.has_value());
    CHECK(*cls == OutlierClass::OddBeginningCurrent);
}

TEST_CASE("dip then overshoot is OddCurve") {
    std::vector<double> cur(300, 1.0);
    for (int i = 100; i < 150; ++i) cur[i] = 0.8;
    for (int i = 150; i < 300; ++i)
        cur[i] = std::min(1.8, 0.8 + 0.02 * (i - 150));
    auto t = make_trace(cur, 2e7);
    auto cls = classify_device_outlier(t, OutlierRuleConfig{});
    REQUIRE(cls.has_value());
    CHECK(*cls == OutlierClass::OddCurve);
}

TEST_CASE("threshold voltage by linear interpolation") {
    IVSweep s;
    s.kind = SweepKind::ThresholdAtFixedVds;
    s.fixed_voltage_v = 0.1;
    s.points = {{0.0, 0.0}, {2.0, 2e-6}};
    CHECK(extract_threshold_voltage(s, 1e-6) == doctest::Approx(1.0));
}

TEST_CASE("criterion above sweep range is a data error") {
    IVSweep s;
    s.kind = SweepKind::ThresholdAtFixedVds;
    s.fixed_voltage_v = 0.1;
    s.points = {{0.0, 0.0}, {2.0, 2e-6}};
    CHECK_THROWS_AS(extract_threshold_voltage(s, 1e-3), DataError);
}

TEST_CASE("empty row set keeps the column schema") {
    DesignMatrix dm = assemble_design_matrix(std::vector<PipelineRow>{}, TargetMode::Status);
    CHECK(dm.predictors.empty());
    // no manufacturers observed and no sweep columns, only the fixed triple
    CHECK(dm.column_names == std::vector<std::string>{"temperature_c", "bias_voltage_v",
                                                      "avg_vth_v"});
}

TEST_CASE("design matrix schema on the synthetic corpus") {
    SynthManifest m;
    SynthCorpus corpus = generate_corpus(m);
    auto rows = build_pipeline_rows(corpus.records, default_grid_set());
    std::vector<PipelineRow> clean;
    for (const auto& r : rows)
        if (!r.status.is_outlier()) clean.push_back(r);
    REQUIRE(clean.size() == 224);

    DesignMatrix dm = assemble_design_matrix(clean, TargetMode::Status);
    // [one-hot 10 | temperature | bias | avg_vth | 101 vgs | 101 vds]
    CHECK(dm.predictors.size() == 224);
    CHECK(dm.column_names.size() == 10 + 3 + 2 * 101);
    CHECK(dm.status_targets.size() == 224);
    for (int t : dm.status_targets) CHECK((t == 0 || t == 1));

    auto sampled = equally_spaced_indices(241, 25);
    DesignMatrix dmf = assemble_design_matrix(clean, TargetMode::FluencePoints, sampled);
    CHECK(dmf.sampled_indices.size() == 25);
    for (const auto& targets : dmf.current_targets) CHECK(targets.size() == 25);
}

TEST_CASE("design matrix rejects outlier rows") {
    SynthManifest m;
    m.manufacturer_count = 2;
    m.devices_per_manufacturer = 4;
    SynthCorpus corpus = generate_corpus(m);
    auto rows = build_pipeline_rows(corpus.records, default_grid_set());
    rows[0].status = DeviceStatus::outlier(OutlierClass::Cloud);
    CHECK_THROWS_AS(assemble_design_matrix(rows, TargetMode::Status), ContractError);
}
