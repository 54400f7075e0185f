#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "radfit/types.hpp"

namespace radfit {

enum class GridAxis { SweepVoltage, Fluence };
enum class GridSpacing { Linear, Log };
enum class InterpMethod { PiecewiseLinear, MonotoneCubic };

/// Shared x-axis sampling so every device's curve is comparable column by
/// column. Positions hit start and end exactly.
struct BenchmarkGrid {
    GridAxis axis = GridAxis::Fluence;
    std::vector<double> positions;

    double start() const { return positions.front(); }
    double end() const { return positions.back(); }
    std::size_t count() const { return positions.size(); }
};

BenchmarkGrid build_benchmark_grid(GridAxis axis, double start, double end, std::size_t count,
                                   GridSpacing spacing);

/// Evaluate an (x, y) series at the grid positions. Inside [min x, max x]
/// the chosen interpolation applies; beyond the ends the first/last observed
/// y is held constant, which also implements the fluence padding rule.
std::vector<double> resample_to_grid(const std::vector<double>& xs, const std::vector<double>& ys,
                                     const BenchmarkGrid& grid, InterpMethod method);

/// Remove points deviating from the centered rolling median by more than
/// mad_multiplier * rolling MAD (MAD floored at 1e-12 A). Endpoints are kept.
StressTrace filter_point_outliers(const StressTrace& trace, double mad_multiplier, int window);

/// Indices (into trace.points) that filter_point_outliers would remove.
std::vector<std::size_t> point_outlier_indices(const StressTrace& trace, double mad_multiplier,
                                               int window);

/// Thresholds quantifying the six visually-identified outlier device classes.
struct OutlierRuleConfig {
    double grid_end_fluence = 6.0e9;  // n/cm^2
    int baseline_window = 5;
    double jump_ratio = 3.0;
    double cloud_fraction = 0.2;
    double rise_frac = 0.5;
    int min_decline_points = 3;
    double decline_floor_frac = 0.5;  // "fell drastically" = below this fraction of baseline
    double i0_lo = 0.0;               // absolute baseline band; 0 disables the check
    double i0_hi = 0.0;
    double mad_multiplier = 5.0;
    int mad_window = 5;

    /// Band of acceptable baseline currents derived from a corpus median.
    OutlierRuleConfig with_baseline_band(double corpus_median_baseline, double lo_factor = 0.1,
                                         double hi_factor = 10.0) const;
};

/// First matching rule in fixed priority order, or nullopt for a clean trace.
std::optional<OutlierClass> classify_device_outlier(const StressTrace& trace,
                                                    const OutlierRuleConfig& config);

/// Constant-current threshold-voltage extraction: voltage where the sweep
/// current first crosses criterion_current, linearly interpolated.
double extract_threshold_voltage(const IVSweep& sweep, double criterion_current_a);

/// Grids used to standardize one corpus.
struct GridSet {
    BenchmarkGrid vgs_grid;      // gate-source sweep voltages
    BenchmarkGrid vds_grid;      // drain-source sweep voltages
    BenchmarkGrid fluence_grid;  // ends at exactly 6.0e9 by default
};

GridSet default_grid_set();

/// One standardized device row: the pipeline-file payload.
struct PipelineRow {
    DeviceId id;
    char manufacturer = 'A';
    double temperature_c = 0.0;
    double bias_voltage_v = 0.0;
    double avg_threshold_voltage_v = 0.0;
    std::vector<double> vgs_currents;      // on vgs_grid
    std::vector<double> vds_currents;      // on vds_grid
    std::vector<double> fluence_currents;  // on fluence_grid
    DeviceStatus status;
};

/// Resample one record onto the grids. criterion_current_a drives V_th
/// extraction; the record's status is carried through unchanged.
PipelineRow build_pipeline_row(const DeviceRecord& record, const GridSet& grids,
                               double criterion_current_a = 1e-6);

std::vector<PipelineRow> build_pipeline_rows(const std::vector<DeviceRecord>& records,
                                             const GridSet& grids,
                                             double criterion_current_a = 1e-6);

enum class TargetMode { Status, FluencePoints };

/// The modeling table: predictors ordered [one-hot manufacturer |
/// temperature | bias | avg V_th | vgs block | vds block]; targets are
/// pass/fail labels (Status) or currents at sampled fluence indices.
struct DesignMatrix {
    std::vector<DeviceId> row_ids;
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> predictors;  // row-major
    TargetMode target_mode = TargetMode::Status;
    std::vector<int> status_targets;                   // 1 = Fail, 0 = Pass
    std::vector<std::vector<double>> current_targets;  // rows x sampled indices
    std::vector<std::size_t> sampled_indices;
    std::vector<char> manufacturers;  // one-hot block order
};

DesignMatrix assemble_design_matrix(const std::vector<PipelineRow>& rows, TargetMode mode,
                                    const std::vector<std::size_t>& sampled_indices = {});

DesignMatrix assemble_design_matrix(const std::vector<DeviceRecord>& records, const GridSet& grids,
                                    TargetMode mode,
                                    const std::vector<std::size_t>& sampled_indices = {});

}  // namespace radfit
