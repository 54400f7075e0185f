#include "radfit/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "radfit/errors.hpp"
#include "radfit/fit.hpp"

namespace radfit {

namespace {

double median_inplace(std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Collapse duplicate x values by averaging their y values. Input x must be
// non-decreasing.
void collapse_duplicates(std::vector<double>& xs, std::vector<double>& ys) {
    std::vector<double> cx, cy;
    cx.reserve(xs.size());
    cy.reserve(ys.size());
    std::size_t i = 0;
    while (i < xs.size()) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < xs.size() && xs[j] == xs[i]) sum += ys[j++];
        cx.push_back(xs[i]);
        cy.push_back(sum / static_cast<double>(j - i));
        i = j;
    }
    xs = std::move(cx);
    ys = std::move(cy);
}

// Fritsch-Carlson tangents: monotone input yields monotone interpolant.
std::vector<double> pchip_tangents(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::size_t n = xs.size();
    std::vector<double> h(n - 1), delta(n - 1), m(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        h[k] = xs[k + 1] - xs[k];
        delta[k] = (ys[k + 1] - ys[k]) / h[k];
    }
    if (n == 2) {
        m[0] = m[1] = delta[0];
        return m;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
        if (delta[k - 1] * delta[k] <= 0.0) {
            m[k] = 0.0;
        } else {
            double w1 = 2.0 * h[k] + h[k - 1];
            double w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    auto end_tangent = [](double h0, double h1, double d0, double d1) {
        double t = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (t * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::fabs(t) > 3.0 * std::fabs(d0)) return 3.0 * d0;
        return t;
    };
    m[0] = end_tangent(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end_tangent(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return m;
}

double hermite_eval(double x, double x0, double x1, double y0, double y1, double m0, double m1) {
    double h = x1 - x0;
    double t = (x - x0) / h;
    double t2 = t * t;
    double t3 = t2 * t;
    double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    double h10 = t3 - 2.0 * t2 + t;
    double h01 = -2.0 * t3 + 3.0 * t2;
    double h11 = t3 - t2;
    return h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
}

}  // namespace

BenchmarkGrid build_benchmark_grid(GridAxis axis, double start, double end, std::size_t count,
                                   GridSpacing spacing) {
    if (!(start < end)) throw DomainError("build_benchmark_grid: start must be < end");
    if (count < 2) throw DomainError("build_benchmark_grid: count must be >= 2");
    if (spacing == GridSpacing::Log && !(start > 0.0))
        throw DomainError("build_benchmark_grid: log spacing requires start > 0");

    BenchmarkGrid grid;
    grid.axis = axis;
    grid.positions.resize(count);
    double denom = static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) {
        double t = static_cast<double>(i) / denom;
        if (spacing == GridSpacing::Linear) {
            grid.positions[i] = start + (end - start) * t;
        } else {
            grid.positions[i] = start * std::pow(end / start, t);
        }
    }
    grid.positions.front() = start;
    grid.positions.back() = end;
    return grid;
}

std::vector<double> resample_to_grid(const std::vector<double>& xs_in,
                                     const std::vector<double>& ys_in, const BenchmarkGrid& grid,
                                     InterpMethod method) {
    if (xs_in.size() != ys_in.size()) throw DataError("resample_to_grid: x/y length mismatch");
    if (xs_in.size() < 2) throw DataError("resample_to_grid: series needs >= 2 points");
    for (std::size_t i = 1; i < xs_in.size(); ++i) {
        if (xs_in[i] < xs_in[i - 1]) throw DataError("resample_to_grid: x must be non-decreasing");
    }

    std::vector<double> xs = xs_in, ys = ys_in;
    collapse_duplicates(xs, ys);
    if (xs.size() < 2) throw DataError("resample_to_grid: fewer than 2 distinct x values");

    std::vector<double> tangents;
    if (method == InterpMethod::MonotoneCubic) tangents = pchip_tangents(xs, ys);

    std::vector<double> out(grid.count());
    for (std::size_t g = 0; g < grid.count(); ++g) {
        double x = grid.positions[g];
        if (x <= xs.front()) {
            out[g] = ys.front();  // hold first observed value
            continue;
        }
        if (x >= xs.back()) {
            out[g] = ys.back();  // hold last recorded value (6.0e9 padding rule)
            continue;
        }
        auto it = std::lower_bound(xs.begin(), xs.end(), x);
        std::size_t k = static_cast<std::size_t>(it - xs.begin());
        if (xs[k] == x) {
            out[g] = ys[k];  // observed x reproduces observed y exactly
            continue;
        }
        std::size_t k0 = k - 1;
        if (method == InterpMethod::PiecewiseLinear) {
            double t = (x - xs[k0]) / (xs[k] - xs[k0]);
            out[g] = ys[k0] + t * (ys[k] - ys[k0]);
        } else {
            out[g] = hermite_eval(x, xs[k0], xs[k], ys[k0], ys[k], tangents[k0], tangents[k]);
        }
    }
    return out;
}

std::vector<std::size_t> point_outlier_indices(const StressTrace& trace, double mad_multiplier,
                                               int window) {
    if (window < 3 || window % 2 == 0)
        throw DomainError("point_outlier_indices: window must be odd and >= 3");
    std::size_t n = trace.points.size();
    std::vector<std::size_t> removed;
    if (n < static_cast<std::size_t>(window)) return removed;

    std::size_t half = static_cast<std::size_t>(window) / 2;
    std::vector<double> win;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        std::size_t lo = i >= half ? i - half : 0;
        std::size_t hi = std::min(lo + static_cast<std::size_t>(window), n);
        if (hi - lo < static_cast<std::size_t>(window)) lo = hi - static_cast<std::size_t>(window);
        win.clear();
        for (std::size_t j = lo; j < hi; ++j) win.push_back(trace.points[j].current_a);
        double med = median_inplace(win);
        for (double& v : win) v = std::fabs(v - med);
        double mad = std::max(median_inplace(win), 1e-12);
        if (std::fabs(trace.points[i].current_a - med) > mad_multiplier * mad) removed.push_back(i);
    }
    return removed;
}

StressTrace filter_point_outliers(const StressTrace& trace, double mad_multiplier, int window) {
    auto removed = point_outlier_indices(trace, mad_multiplier, window);
    if (removed.empty()) return trace;
    StressTrace out;
    out.flux_ncm2s = trace.flux_ncm2s;
    out.points.reserve(trace.points.size() - removed.size());
    std::size_t r = 0;
    for (std::size_t i = 0; i < trace.points.size(); ++i) {
        if (r < removed.size() && removed[r] == i) {
            ++r;
            continue;
        }
        out.points.push_back(trace.points[i]);
    }
    return out;
}

OutlierRuleConfig OutlierRuleConfig::with_baseline_band(double corpus_median_baseline,
                                                        double lo_factor, double hi_factor) const {
    OutlierRuleConfig c = *this;
    c.i0_lo = lo_factor * corpus_median_baseline;
    c.i0_hi = hi_factor * corpus_median_baseline;
    return c;
}

std::optional<OutlierClass> classify_device_outlier(const StressTrace& trace,
                                                    const OutlierRuleConfig& config) {
    if (!trace.valid()) throw DataError("classify_device_outlier: invalid trace");

    StressTrace filtered = filter_point_outliers(trace, config.mad_multiplier, config.mad_window);
    double removed_fraction =
        static_cast<double>(trace.points.size() - filtered.points.size()) /
        static_cast<double>(trace.points.size());

    const auto& pts = filtered.points;
    std::size_t nwin = std::min<std::size_t>(pts.size(), static_cast<std::size_t>(config.baseline_window));
    std::vector<double> head;
    for (std::size_t i = 0; i < nwin; ++i) head.push_back(pts[i].current_a);
    double baseline = median_inplace(head);
    if (!(baseline > 0.0)) return OutlierClass::OddBeginningCurrent;

    double floor_level = config.decline_floor_frac * baseline;

    // 1. InstantCurrentDecline: drastic drop within the first 5% of fluence.
    for (const auto& p : pts) {
        if (p.fluence_ncm2 >= 0.05 * config.grid_end_fluence) break;
        if (p.current_a < floor_level) return OutlierClass::InstantCurrentDecline;
    }

    // 2. LittleDataAtDecline: the curve reaches the decline floor with almost
    // no samples in the transition band.
    bool reaches_floor = std::any_of(pts.begin(), pts.end(), [&](const TracePoint& p) {
        return p.current_a < floor_level;
    });
    if (reaches_floor) {
        int in_band = 0;
        for (const auto& p : pts) {
            if (p.current_a >= floor_level && p.current_a < 0.9 * baseline) ++in_band;
        }
        if (in_band < config.min_decline_points) return OutlierClass::LittleDataAtDecline;
    }

    // 3. CurrentJump: upward jump discontinuity between adjacent points.
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double prev = pts[i - 1].current_a;
        if (prev > 1e-15 && pts[i].current_a / prev > config.jump_ratio)
            return OutlierClass::CurrentJump;
    }

    // 4. Cloud: too many point outliers relative to the trend.
    if (removed_fraction > config.cloud_fraction) return OutlierClass::Cloud;

    // 5. OddBeginningCurrent: baseline outside the corpus-derived band.
    if (config.i0_lo > 0.0 || config.i0_hi > 0.0) {
        if (baseline < config.i0_lo || baseline > config.i0_hi)
            return OutlierClass::OddBeginningCurrent;
    }

    // 6. OddCurve: fell below 90% of baseline, then rose well above baseline.
    bool fell = false;
    for (const auto& p : pts) {
        if (p.current_a < 0.9 * baseline) fell = true;
        if (fell && p.current_a > (1.0 + config.rise_frac) * baseline)
            return OutlierClass::OddCurve;
    }

    return std::nullopt;
}

double extract_threshold_voltage(const IVSweep& sweep, double criterion_current_a) {
    if (!sweep.valid()) throw DataError("extract_threshold_voltage: invalid sweep");
    const auto& p = sweep.points;
    if (p.front().current_a >= criterion_current_a) {
        if (p.front().current_a == criterion_current_a) return p.front().voltage_v;
        throw DataError("extract_threshold_voltage: criterion below sweep current range");
    }
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i].current_a >= criterion_current_a) {
            if (p[i].current_a == criterion_current_a) return p[i].voltage_v;
            double t = (criterion_current_a - p[i - 1].current_a) /
                       (p[i].current_a - p[i - 1].current_a);
            return p[i - 1].voltage_v + t * (p[i].voltage_v - p[i - 1].voltage_v);
        }
    }
    throw DataError("extract_threshold_voltage: criterion current never crossed");
}

GridSet default_grid_set() {
    GridSet g;
    g.vgs_grid = build_benchmark_grid(GridAxis::SweepVoltage, -5.0, 5.0, 101, GridSpacing::Linear);
    g.vds_grid = build_benchmark_grid(GridAxis::SweepVoltage, -5.0, 5.0, 101, GridSpacing::Linear);
    g.fluence_grid = build_benchmark_grid(GridAxis::Fluence, 0.0, 6.0e9, 241, GridSpacing::Linear);
    return g;
}

PipelineRow build_pipeline_row(const DeviceRecord& record, const GridSet& grids,
                               double criterion_current_a) {
    PipelineRow row;
    row.id = record.id;
    row.manufacturer = record.id.manufacturer;
    row.temperature_c = record.condition.temperature_c;
    row.bias_voltage_v = record.condition.bias_voltage_v;
    row.status = record.status;

    auto sweep_currents = [&](const IVSweep& sweep, const BenchmarkGrid& grid) {
        std::vector<double> xs, ys;
        xs.reserve(sweep.points.size());
        ys.reserve(sweep.points.size());
        for (const auto& p : sweep.points) {
            xs.push_back(p.voltage_v);
            ys.push_back(p.current_a);
        }
        return resample_to_grid(xs, ys, grid, InterpMethod::MonotoneCubic);
    };

    const IVSweep* vgs = record.find_pre_sweep(SweepKind::GateSourceAtVds0);
    const IVSweep* vds = record.find_pre_sweep(SweepKind::DrainSourceAtVgs0);
    if (!vgs || !vds) throw DataError("build_pipeline_row: missing pre-stress sweep for " + record.id.render());
    row.vgs_currents = sweep_currents(*vgs, grids.vgs_grid);
    row.vds_currents = sweep_currents(*vds, grids.vds_grid);

    // Average V_th across the available threshold sweeps (pre, and post when
    // measured); fall back to the recorded value if extraction fails.
    double vth_sum = 0.0;
    int vth_n = 0;
    auto try_vth = [&](const IVSweep* s) {
        if (!s) return;
        try {
            vth_sum += extract_threshold_voltage(*s, criterion_current_a);
            ++vth_n;
        } catch (const DataError&) {
        }
    };
    try_vth(record.find_pre_sweep(SweepKind::ThresholdAtFixedVds));
    if (record.post_sweeps) {
        for (const auto& s : *record.post_sweeps) {
            if (s.kind == SweepKind::ThresholdAtFixedVds) try_vth(&s);
        }
    }
    row.avg_threshold_voltage_v = vth_n > 0 ? vth_sum / vth_n : record.threshold_voltage_v;

    std::vector<double> fx, fy;
    fx.reserve(record.trace.points.size());
    fy.reserve(record.trace.points.size());
    for (const auto& p : record.trace.points) {
        fx.push_back(p.fluence_ncm2);
        fy.push_back(p.current_a);
    }
    row.fluence_currents = resample_to_grid(fx, fy, grids.fluence_grid, InterpMethod::PiecewiseLinear);
    return row;
}

std::vector<PipelineRow> build_pipeline_rows(const std::vector<DeviceRecord>& records,
                                             const GridSet& grids, double criterion_current_a) {
    std::vector<PipelineRow> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(build_pipeline_row(r, grids, criterion_current_a));
    return rows;
}

DesignMatrix assemble_design_matrix(const std::vector<PipelineRow>& rows, TargetMode mode,
                                    const std::vector<std::size_t>& sampled_indices) {
    DesignMatrix dm;
    dm.target_mode = mode;
    dm.sampled_indices = sampled_indices;

    for (const auto& r : rows) {
        if (r.status.is_outlier())
            throw ContractError("assemble_design_matrix: outlier device " + r.id.render() +
                                " must be removed first");
    }
    if (mode == TargetMode::FluencePoints) {
        if (sampled_indices.empty())
            throw DomainError("assemble_design_matrix: fluence_points mode needs sampled indices");
        for (std::size_t i = 1; i < sampled_indices.size(); ++i) {
            if (sampled_indices[i] <= sampled_indices[i - 1])
                throw DomainError("assemble_design_matrix: sampled indices must be strictly increasing");
        }
    }

    std::vector<char> manufacturers;
    for (const auto& r : rows) manufacturers.push_back(r.manufacturer);
    std::sort(manufacturers.begin(), manufacturers.end());
    manufacturers.erase(std::unique(manufacturers.begin(), manufacturers.end()),
                        manufacturers.end());
    dm.manufacturers = manufacturers;

    std::size_t vgs_n = rows.empty() ? 0 : rows.front().vgs_currents.size();
    std::size_t vds_n = rows.empty() ? 0 : rows.front().vds_currents.size();
    for (char m : manufacturers) dm.column_names.push_back(std::string("mfr_") + m);
    dm.column_names.push_back("temperature_c");
    dm.column_names.push_back("bias_voltage_v");
    dm.column_names.push_back("avg_vth_v");
    for (std::size_t k = 0; k < vgs_n; ++k) dm.column_names.push_back("vgsigs_" + std::to_string(k));
    for (std::size_t k = 0; k < vds_n; ++k) dm.column_names.push_back("vdsids_" + std::to_string(k));

    for (const auto& r : rows) {
        std::vector<double> x;
        x.reserve(dm.column_names.size());
        for (char m : manufacturers) x.push_back(m == r.manufacturer ? 1.0 : 0.0);
        x.push_back(r.temperature_c);
        x.push_back(r.bias_voltage_v);
        x.push_back(r.avg_threshold_voltage_v);
        x.insert(x.end(), r.vgs_currents.begin(), r.vgs_currents.end());
        x.insert(x.end(), r.vds_currents.begin(), r.vds_currents.end());
        dm.predictors.push_back(std::move(x));
        dm.row_ids.push_back(r.id);

        if (mode == TargetMode::Status) {
            dm.status_targets.push_back(r.status.is_fail() ? 1 : 0);
        } else {
            std::vector<double> y;
            y.reserve(sampled_indices.size());
            for (std::size_t idx : sampled_indices) {
                if (idx >= r.fluence_currents.size())
                    throw DomainError("assemble_design_matrix: sampled index out of range");
                y.push_back(r.fluence_currents[idx]);
            }
            dm.current_targets.push_back(std::move(y));
        }
    }
    return dm;
}

DesignMatrix assemble_design_matrix(const std::vector<DeviceRecord>& records, const GridSet& grids,
                                    TargetMode mode,
                                    const std::vector<std::size_t>& sampled_indices) {
    return assemble_design_matrix(build_pipeline_rows(records, grids), mode, sampled_indices);
}

}  // namespace radfit
