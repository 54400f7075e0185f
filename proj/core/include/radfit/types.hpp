#pragma once

#include <optional>
#include <string>
#include <vector>

namespace radfit {

/// Device identity: manufacturer letter code plus 1-based device number,
/// rendered as "A_1". parse(render(x)) == x.
struct DeviceId {
    char manufacturer = 'A';  // 'A'..'Z'
    int index = 1;            // >= 1

    std::string render() const;
    static DeviceId parse(const std::string& text);

    auto operator<=>(const DeviceId&) const = default;
};

/// Stress condition during beam exposure. Temperature is exactly 25 or 150.
struct StressCondition {
    double temperature_c = 25.0;
    double bias_voltage_v = 0.0;

    bool valid() const { return (temperature_c == 25.0 || temperature_c == 150.0) && bias_voltage_v > 0.0; }
};

enum class SweepKind {
    GateSourceAtVds0,
    DrainSourceAtVgs0,
    ThresholdAtFixedVds,
};

std::string to_string(SweepKind k);
SweepKind sweep_kind_from_string(const std::string& s);

struct SweepPoint {
    double voltage_v = 0.0;
    double current_a = 0.0;
};

/// One static I-V characterization sweep. Voltages strictly increasing.
struct IVSweep {
    SweepKind kind = SweepKind::GateSourceAtVds0;
    std::optional<double> fixed_voltage_v;  // only for ThresholdAtFixedVds
    std::vector<SweepPoint> points;

    bool valid() const;
};

struct TracePoint {
    double fluence_ncm2 = 0.0;
    double current_a = 0.0;
};

/// Dynamic stress-response data: current measured against accumulated
/// neutron fluence, plus the beam flux that converts fluence to time.
struct StressTrace {
    std::vector<TracePoint> points;
    double flux_ncm2s = 0.0;

    bool valid() const;
    double max_fluence() const { return points.empty() ? 0.0 : points.back().fluence_ncm2; }
};

enum class OutlierClass {
    LittleDataAtDecline,
    CurrentJump,
    InstantCurrentDecline,
    Cloud,
    OddCurve,
    OddBeginningCurrent,
};

inline constexpr int kOutlierClassCount = 6;

std::string to_string(OutlierClass c);
OutlierClass outlier_class_from_string(const std::string& s);

/// Pass/Fail verdict, or an outlier classification that excludes the device
/// from model training.
struct DeviceStatus {
    enum class Kind { Pass, Fail, Outlier } kind = Kind::Pass;
    std::optional<OutlierClass> outlier_class;

    static DeviceStatus pass() { return {Kind::Pass, std::nullopt}; }
    static DeviceStatus fail() { return {Kind::Fail, std::nullopt}; }
    static DeviceStatus outlier(OutlierClass c) { return {Kind::Outlier, c}; }

    bool is_pass() const { return kind == Kind::Pass; }
    bool is_fail() const { return kind == Kind::Fail; }
    bool is_outlier() const { return kind == Kind::Outlier; }

    std::string render() const;
    static DeviceStatus parse(const std::string& text);

    bool operator==(const DeviceStatus&) const = default;
};

/// Everything measured for one tested device.
struct DeviceRecord {
    DeviceId id;
    StressCondition condition;
    std::vector<IVSweep> pre_sweeps;             // one per kind, all three present
    std::optional<std::vector<IVSweep>> post_sweeps;
    double threshold_voltage_v = 0.0;
    StressTrace trace;
    DeviceStatus status;

    const IVSweep* find_pre_sweep(SweepKind k) const;
};

}  // namespace radfit
