#include <cmath>
#include <limits>

#include <doctest.h>

#include "radfit/errors.hpp"
#include "radfit/fit.hpp"
#include "radfit/learners.hpp"
#include "radfit/rng.hpp"
#include "radfit/text.hpp"
#include "radfit/types.hpp"

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

TEST_CASE("device id renders and parses") {
    DeviceId id{'A', 1};
    CHECK(id.render() == "A_1");
    CHECK(DeviceId::parse("J_24") == DeviceId{'J', 24});
    CHECK(DeviceId::parse(id.render()) == id);
    CHECK_THROWS_AS(DeviceId::parse("bad"), ParseError);
    CHECK_THROWS_AS(DeviceId::parse("A_0"), ParseError);
}

TEST_CASE("device status renders and parses") {
    CHECK(DeviceStatus::pass().render() == "Pass");
    CHECK(DeviceStatus::fail().render() == "Fail");
    DeviceStatus o = DeviceStatus::outlier(OutlierClass::Cloud);
    CHECK(o.render() == "Outlier:Cloud");
    CHECK(DeviceStatus::parse("Outlier:Cloud") == o);
    CHECK(DeviceStatus::parse("Pass") == DeviceStatus::pass());
    CHECK_THROWS_AS(DeviceStatus::parse("Maybe"), ParseError);
}

TEST_CASE("outlier class string round trip") {
    for (int k = 0; k < kOutlierClassCount; ++k) {
        auto c = static_cast<OutlierClass>(k);
        CHECK(outlier_class_from_string(to_string(c)) == c);
    }
}

TEST_CASE("fit with zero failures is zero and mtbf infinite") {
    FitResult r = compute_fit(0, 24, 6.0e9, 1e6);
    CHECK(r.fit == 0.0);
    CHECK(r.mtbf_infinite());
    CHECK(std::isinf(r.mtbf_hours));
}

TEST_CASE("fit units cancel") {
    // 1/(3.6e12) * 1 * 3600 * 1e9 = 1
    FitResult r = compute_fit(1, 1, 3.6e12, 1.0);
    CHECK(r.fit == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit 5 of 24 at 6e9 fluence and 1e6 flux") {
    // oracle by hand: 5 / (24 * 6e9) * 1e6 * 3600 * 1e9 = 1.25e8
    FitResult r = compute_fit(5, 24, 6.0e9, 1e6);
    CHECK(r.fit == doctest::Approx(1.25e8).epsilon(1e-12));
    CHECK(r.mtbf_hours == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("fit argument validation") {
    CHECK_THROWS_AS(compute_fit(-1, 24, 6.0e9, 1e6), DomainError);
    CHECK_THROWS_AS(compute_fit(25, 24, 6.0e9, 1e6), DomainError);
    CHECK_THROWS_AS(compute_fit(5, 0, 6.0e9, 1e6), DomainError);
    CHECK_THROWS_AS(compute_fit(5, 24, 0.0, 1e6), DomainError);
    CHECK_THROWS_AS(compute_fit(5, 24, 6.0e9, 0.0), DomainError);
}

TEST_CASE("mtbf from fit") {
    CHECK(mtbf_from_fit(1e9) == doctest::Approx(1.0));
    CHECK(std::isinf(mtbf_from_fit(0.0)));
    CHECK(mtbf_from_fit(1.25e8) == doctest::Approx(8.0));
}

TEST_CASE("fit times mtbf is 1e9 over random valid inputs") {
    Rng rng(101);
    for (int i = 0; i < 1000; ++i) {
        int total = 1 + static_cast<int>(rng.uniform_index(100));
        int failed = 1 + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(total)));
        double fluence = rng.uniform(1e6, 1e13);
        double flux = rng.uniform(1.0, 1e8);
        FitResult r = compute_fit(failed, total, fluence, flux);
        CHECK(r.fit * r.mtbf_hours == doctest::Approx(1e9).epsilon(1e-9));
    }
}

TEST_CASE("constant trace passes") {
    auto t = make_trace(std::vector<double>(30, 1.0));
    CHECK(classify_trace_status(t, 0.9, 5).is_pass());
}

TEST_CASE("step to half current fails") {
    std::vector<double> cur(30, 1.0);
    for (std::size_t i = 15; i < 30; ++i) cur[i] = 0.5;
    auto t = make_trace(cur);
    CHECK(classify_trace_status(t, 0.9, 5).is_fail());
}

TEST_CASE("single spike survives 3-point median smoothing") {
    std::vector<double> cur(30, 1.0);
    cur[12] = 0.2;  // isolated dip is not a sustained drop
    auto t = make_trace(cur);
    CHECK(classify_trace_status(t, 0.9, 5).is_pass());
}

TEST_CASE("fit result is linear in failed count") {
    double base = compute_fit(1, 24, 6.0e9, 1e6).fit;
    for (int k = 2; k <= 24; ++k)
        CHECK(compute_fit(k, 24, 6.0e9, 1e6).fit == doctest::Approx(k * base).epsilon(1e-12));
}

TEST_CASE("format_double round trips") {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        double v = rng.normal() * std::pow(10.0, rng.uniform(-12.0, 12.0));
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.0) == "0");
    CHECK(parse_double("6e9") == 6.0e9);
}

TEST_CASE("parse_double rejects trailing garbage") {
    CHECK_THROWS_AS(parse_double("1.5abc"), ParseError);
    CHECK_THROWS_AS(parse_double(""), ParseError);
    CHECK_THROWS_AS(parse_double("  "), ParseError);
}

TEST_CASE("split_csv_line") {
    auto f = split_csv_line("a,b,,d");
    REQUIRE(f.size() == 4);
    CHECK(f[0] == "a");
    CHECK(f[2] == "");
    CHECK(split_csv_line("").size() == 1);
}

TEST_CASE("accuracy score") {
    CHECK(accuracy_score({1, 1, 0}, {1, 1, 0}) == 1.0);
    CHECK(accuracy_score({1, 1, 1}, {0, 0, 0}) == 0.0);
    CHECK(accuracy_score({1, 1, 0, 0}, {1, 1, 0, 1}) == 0.75);
}
