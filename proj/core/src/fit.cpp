#include "radfit/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "radfit/errors.hpp"

namespace radfit {

bool FitResult::mtbf_infinite() const { return std::isinf(mtbf_hours); }

FitResult compute_fit(int failed_count, int total_count, double final_fluence_ncm2,
                      double flux_ncm2s) {
    if (total_count <= 0) throw DomainError("compute_fit: total_count must be positive");
    if (!(final_fluence_ncm2 > 0.0)) throw DomainError("compute_fit: final fluence must be positive");
    if (!(flux_ncm2s > 0.0)) throw DomainError("compute_fit: flux must be positive");
    if (failed_count < 0) throw DomainError("compute_fit: failed_count must be non-negative");
    if (failed_count > total_count) throw DomainError("compute_fit: failed_count exceeds total_count");

    FitResult r;
    r.failed_count = failed_count;
    r.total_count = total_count;
    r.final_fluence_ncm2 = final_fluence_ncm2;
    r.flux_ncm2s = flux_ncm2s;
    r.fit = static_cast<double>(failed_count) /
            (static_cast<double>(total_count) * final_fluence_ncm2) * flux_ncm2s * 60.0 * 60.0 *
            1e9;
    r.mtbf_hours = mtbf_from_fit(r.fit);
    return r;
}

double mtbf_from_fit(double fit) {
    if (fit < 0.0) throw DomainError("mtbf_from_fit: fit must be non-negative");
    if (fit == 0.0) return std::numeric_limits<double>::infinity();
    return 1e9 / fit;
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double median3(double a, double b, double c) {
    return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

}  // namespace

DeviceStatus classify_trace_status(const StressTrace& trace, double drop_fraction,
                                   int baseline_window) {
    if (!trace.valid()) throw DataError("classify_trace_status: invalid trace");
    if (!(drop_fraction > 0.0 && drop_fraction < 1.0))
        throw DomainError("classify_trace_status: drop_fraction must be in (0,1)");
    if (baseline_window < 1 || static_cast<std::size_t>(baseline_window) > trace.points.size())
        throw DomainError("classify_trace_status: baseline_window out of range");

    std::vector<double> head;
    head.reserve(baseline_window);
    for (int i = 0; i < baseline_window; ++i) head.push_back(trace.points[i].current_a);
    double baseline = median_of(std::move(head));
    if (!(baseline > 0.0)) throw DataError("classify_trace_status: non-positive baseline current");

    double threshold = drop_fraction * baseline;
    std::size_t n = trace.points.size();
    for (std::size_t i = 0; i < n; ++i) {
        double smoothed;
        if (i == 0 || i + 1 == n) {
            smoothed = trace.points[i].current_a;
        } else {
            smoothed = median3(trace.points[i - 1].current_a, trace.points[i].current_a,
                               trace.points[i + 1].current_a);
        }
        if (smoothed < threshold) return DeviceStatus::fail();
    }
    return DeviceStatus::pass();
}

}  // namespace radfit
