#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "radfit/types.hpp"

namespace radfit {

/// Knobs for the deterministic beam-experiment generator. Defaults produce
/// the 10-manufacturer, 24-device corpus with 16 injected outlier devices.
struct SynthManifest {
    int manufacturer_count = 10;
    int devices_per_manufacturer = 24;
    std::vector<double> bias_levels_v = {685.0, 1027.0, 1369.0};
    double failure_fraction = 0.65;
    double noise_sigma = 0.02;        // relative current noise
    double signal_strength = 3.0;     // 0 = status independent of predictors
    double vth_spread_v = 0.2;        // per-device threshold-voltage jitter
    double drop_location_noise = 0.15;
    double flux_ncm2s = 1e6;
    int trace_points = 300;
    // Injection rates per OutlierClass enum order; defaults sum to 16/240.
    std::array<double, kOutlierClassCount> outlier_rates = {3.0 / 240, 3.0 / 240, 3.0 / 240,
                                                            3.0 / 240, 2.0 / 240, 2.0 / 240};
    std::uint64_t seed = 42;

    int device_count() const { return manufacturer_count * devices_per_manufacturer; }
};

SynthManifest load_synth_manifest(const std::filesystem::path& path);
void write_synth_manifest(const SynthManifest& manifest, const std::filesystem::path& path);

/// What the generator actually planted, used as the oracle in tests.
struct GroundTruth {
    DeviceId id;
    DeviceStatus status;
    double drop_fluence_ncm2 = 0.0;  // 0 for passing devices
    double planted_vth_v = 0.0;
    std::optional<OutlierClass> injected_class;
    std::vector<std::size_t> injected_point_indices;  // into the trace
};

/// Temperature alternates by device index (odd = 25 C); bias cycles through
/// the manifest levels.
StressCondition default_condition(const SynthManifest& manifest, int index);

/// The latent failure variable for one device; generate_corpus thresholds
/// these at the empirical quantile matching failure_fraction.
double device_failure_latent(const SynthManifest& manifest, int manufacturer, int index,
                             const StressCondition& condition);

std::pair<DeviceRecord, GroundTruth> generate_device(const SynthManifest& manifest,
                                                     int manufacturer, int index,
                                                     const StressCondition& condition,
                                                     double fail_threshold);

std::pair<DeviceRecord, GroundTruth> inject_outlier(const DeviceRecord& record,
                                                    const GroundTruth& truth, OutlierClass cls,
                                                    std::uint64_t seed);

struct SynthCorpus {
    std::vector<DeviceRecord> records;
    std::vector<GroundTruth> truths;
};

SynthCorpus generate_corpus(const SynthManifest& manifest);

/// Emit the corpus in the raw ingest formats: per-device sweep and trace
/// CSVs, a dataset manifest, and ground_truth.csv.
void write_corpus_files(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace radfit
