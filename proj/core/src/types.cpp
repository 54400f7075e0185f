#include "radfit/types.hpp"

#include <algorithm>
#include <cmath>

#include "radfit/errors.hpp"

namespace radfit {

std::string DeviceId::render() const {
    return std::string(1, manufacturer) + "_" + std::to_string(index);
}

DeviceId DeviceId::parse(const std::string& text) {
    auto us = text.find('_');
    if (us != 1 || text.size() < 3) throw ParseError("bad device id: '" + text + "'");
    char m = text[0];
    if (m < 'A' || m > 'Z') throw ParseError("bad manufacturer letter in device id: '" + text + "'");
    int idx = 0;
    for (std::size_t i = 2; i < text.size(); ++i) {
        char c = text[i];
        if (c < '0' || c > '9') throw ParseError("bad device index in device id: '" + text + "'");
        idx = idx * 10 + (c - '0');
    }
    if (idx < 1) throw ParseError("device index must be >= 1: '" + text + "'");
    return DeviceId{m, idx};
}

std::string to_string(SweepKind k) {
    switch (k) {
        case SweepKind::GateSourceAtVds0: return "gate_source_at_vds0";
        case SweepKind::DrainSourceAtVgs0: return "drain_source_at_vgs0";
        case SweepKind::ThresholdAtFixedVds: return "threshold_at_fixed_vds";
    }
    throw DomainError("unknown sweep kind");
}

SweepKind sweep_kind_from_string(const std::string& s) {
    if (s == "gate_source_at_vds0") return SweepKind::GateSourceAtVds0;
    if (s == "drain_source_at_vgs0") return SweepKind::DrainSourceAtVgs0;
    if (s == "threshold_at_fixed_vds") return SweepKind::ThresholdAtFixedVds;
    throw ParseError("unknown sweep kind: '" + s + "'");
}

bool IVSweep::valid() const {
    if (points.size() < 2) return false;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i - 1].voltage_v < points[i].voltage_v)) return false;
    }
    if ((kind == SweepKind::ThresholdAtFixedVds) != fixed_voltage_v.has_value()) return false;
    return true;
}

bool StressTrace::valid() const {
    if (points.size() < 2 || !(flux_ncm2s > 0.0)) return false;
    double prev = -1.0;
    for (const auto& p : points) {
        if (p.fluence_ncm2 < 0.0 || p.fluence_ncm2 < prev) return false;
        if (!std::isfinite(p.current_a)) return false;
        prev = p.fluence_ncm2;
    }
    return true;
}

std::string to_string(OutlierClass c) {
    switch (c) {
        case OutlierClass::LittleDataAtDecline: return "LittleDataAtDecline";
        case OutlierClass::CurrentJump: return "CurrentJump";
        case OutlierClass::InstantCurrentDecline: return "InstantCurrentDecline";
        case OutlierClass::Cloud: return "Cloud";
        case OutlierClass::OddCurve: return "OddCurve";
        case OutlierClass::OddBeginningCurrent: return "OddBeginningCurrent";
    }
    throw DomainError("unknown outlier class");
}

OutlierClass outlier_class_from_string(const std::string& s) {
    if (s == "LittleDataAtDecline") return OutlierClass::LittleDataAtDecline;
    if (s == "CurrentJump") return OutlierClass::CurrentJump;
    if (s == "InstantCurrentDecline") return OutlierClass::InstantCurrentDecline;
    if (s == "Cloud") return OutlierClass::Cloud;
    if (s == "OddCurve") return OutlierClass::OddCurve;
    if (s == "OddBeginningCurrent") return OutlierClass::OddBeginningCurrent;
    throw ParseError("unknown outlier class: '" + s + "'");
}

std::string DeviceStatus::render() const {
    switch (kind) {
        case Kind::Pass: return "Pass";
        case Kind::Fail: return "Fail";
        case Kind::Outlier: return "Outlier:" + to_string(*outlier_class);
    }
    throw DomainError("unknown status kind");
}

DeviceStatus DeviceStatus::parse(const std::string& text) {
    if (text == "Pass") return pass();
    if (text == "Fail") return fail();
    if (text.rfind("Outlier:", 0) == 0) return outlier(outlier_class_from_string(text.substr(8)));
    throw ParseError("unknown device status: '" + text + "'");
}

const IVSweep* DeviceRecord::find_pre_sweep(SweepKind k) const {
    auto it = std::find_if(pre_sweeps.begin(), pre_sweeps.end(),
                           [&](const IVSweep& s) { return s.kind == k; });
    return it == pre_sweeps.end() ? nullptr : &*it;
}

}  // namespace radfit
