#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "radfit/preprocess.hpp"
#include "radfit/types.hpp"

namespace radfit {

/// File locations and condition fields for one device in a raw dataset.
struct ManifestEntry {
    DeviceId id;
    StressCondition condition;
    double flux_ncm2s = 0.0;
    double threshold_fixed_vds_v = 0.0;
    std::filesystem::path pre_threshold;
    std::filesystem::path pre_vgs_igs;
    std::filesystem::path pre_vds_ids;
    std::optional<std::filesystem::path> post_threshold;
    std::optional<std::filesystem::path> post_vgs_igs;
    std::optional<std::filesystem::path> post_vds_ids;
    std::filesystem::path trace;
};

struct RawDatasetManifest {
    std::filesystem::path root;
    std::vector<ManifestEntry> entries;
};

RawDatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const RawDatasetManifest& manifest, const std::filesystem::path& path);

/// Two-column CSV "voltage_v,current_a" with one header line. Rows are
/// sorted by voltage; duplicate voltages are collapsed by averaging.
IVSweep parse_static_sweep_csv(std::istream& in, SweepKind kind,
                               std::optional<double> fixed_voltage = std::nullopt);

/// Two-column CSV "fluence_ncm2,current_a" with one header line; output is
/// sorted by fluence. Negative fluence is rejected.
StressTrace parse_stress_trace_csv(std::istream& in, double flux_ncm2s);

/// Read every file referenced by the manifest into DeviceRecords, ordered by
/// DeviceId. Statuses start as Pass placeholders until preprocessing assigns
/// them.
std::vector<DeviceRecord> load_dataset(const RawDatasetManifest& manifest);

struct ValidationIssue {
    DeviceId id;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool clean() const { return issues.empty(); }
};

ValidationReport validate_dataset(const std::vector<DeviceRecord>& records);

/// The single standardized modeling input: benchmark grids plus one row per
/// device.
struct PipelineFile {
    GridSet grids;
    std::vector<PipelineRow> rows;
};

/// Round-trips bit-exactly: numbers are written with shortest round-trip
/// decimals.
void write_pipeline_file(const PipelineFile& file, const std::filesystem::path& path);
PipelineFile load_pipeline_file(const std::filesystem::path& path);

}  // namespace radfit
