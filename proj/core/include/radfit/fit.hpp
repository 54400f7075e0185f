#pragma once

#include "radfit/types.hpp"

namespace radfit {

/// Failure-in-time summary for a device cohort. fit is failures per 1e9
/// device-hours; mtbf is hours, +infinity when no device failed.
struct FitResult {
    int failed_count = 0;
    int total_count = 0;
    double final_fluence_ncm2 = 0.0;
    double flux_ncm2s = 0.0;
    double fit = 0.0;
    double mtbf_hours = 0.0;

    bool mtbf_infinite() const;
};

/// FIT = failed / (total * fluence) * flux * 3600 * 1e9.
FitResult compute_fit(int failed_count, int total_count, double final_fluence_ncm2,
                      double flux_ncm2s);

/// MTBF = 1e9 / FIT hours; fit == 0 yields +infinity.
double mtbf_from_fit(double fit);

/// Pass/fail verdict from a stress trace: baseline is the median current of
/// the first baseline_window points; the device fails if any 3-point-median
/// smoothed current drops below drop_fraction * baseline.
DeviceStatus classify_trace_status(const StressTrace& trace, double drop_fraction,
                                   int baseline_window);

}  // namespace radfit
