#include "radfit/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "radfit/errors.hpp"
#include "radfit/ingest.hpp"
#include "radfit/rng.hpp"
#include "radfit/text.hpp"

namespace radfit {

namespace {

using nlohmann::json;

constexpr double kGridEnd = 6.0e9;
constexpr double kVthCriterion = 1e-6;  // A

// Plausible power-MOSFET threshold voltages, cycled per manufacturer.
constexpr double kVthBases[] = {3.058, 1.354, 2.069, 5.432, 3.251, 2.5, 1.8, 4.2, 3.7, 2.9};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct ManufacturerTemplate {
    double vth_base;
    double baseline_current;  // A
    double vgs_gain;
    double vgs_scale;
    double vds_gain;
    double vds_scale;
    double fail_offset;  // alpha_m, in [-1, 1]
    double drop_offset;  // beta_m, in [-1, 1]
};

ManufacturerTemplate manufacturer_template(int m) {
    ManufacturerTemplate t;
    t.vth_base = kVthBases[m % 10] + 0.37 * (m / 10);
    t.baseline_current = 0.6 + 0.08 * (m % 10);
    t.vgs_gain = 1.0 + 0.7 * m;
    t.vgs_scale = 1.0 + 0.15 * m;
    t.vds_gain = 0.5 + 0.3 * m;
    t.vds_scale = 1.0 + 0.2 * m;
    t.fail_offset = static_cast<double>((m * 7) % 10) / 4.5 - 1.0;
    t.drop_offset = static_cast<double>((m * 3) % 10) / 4.5 - 1.0;
    return t;
}

Rng device_rng(const SynthManifest& manifest, int manufacturer, int index) {
    Rng base(manifest.seed);
    std::uint64_t tag = (static_cast<std::uint64_t>(manufacturer + 1) << 20) |
                        static_cast<std::uint64_t>(index);
    return base.split(tag);
}

int bias_index(const SynthManifest& manifest, const StressCondition& c) {
    for (std::size_t i = 0; i < manifest.bias_levels_v.size(); ++i) {
        if (manifest.bias_levels_v[i] == c.bias_voltage_v) return static_cast<int>(i);
    }
    return static_cast<int>(manifest.bias_levels_v.size()) / 2;
}

struct DeviceDraws {
    double vth;
    double vz;  // standardized vth deviation
    double latent;
    double loc_sig;    // in (0, 1): drop position control
    double depth;      // fractional current drop of failing curves
    double fluence_end;
    Rng noise_rng{0};  // remaining stream for trace/sweep noise
};

DeviceDraws draw_device(const SynthManifest& manifest, int manufacturer, int index,
                        const StressCondition& condition) {
    ManufacturerTemplate t = manufacturer_template(manufacturer);
    Rng rng = device_rng(manifest, manufacturer, index);

    DeviceDraws d;
    double u_vth = 2.0 * rng.uniform() - 1.0;
    d.vth = t.vth_base + manifest.vth_spread_v * u_vth;
    d.vz = u_vth;

    double temp_sign = condition.temperature_c >= 100.0 ? 1.0 : -1.0;
    double bz = static_cast<double>(bias_index(manifest, condition)) -
                (static_cast<double>(manifest.bias_levels_v.size()) - 1.0) / 2.0;
    double score = 0.9 * temp_sign + 0.6 * bz + 0.8 * d.vz + 1.0 * t.fail_offset;
    d.latent = manifest.signal_strength * score + rng.normal();

    double loc_score = 0.8 * bz + 0.9 * d.vz - 0.5 * temp_sign + t.drop_offset;
    d.loc_sig = sigmoid(loc_score + manifest.drop_location_noise * rng.normal());

    d.depth = 0.28 + 0.04 * rng.uniform();
    d.fluence_end = kGridEnd * (0.85 + 0.3 * rng.uniform());
    d.noise_rng = rng;
    return d;
}

IVSweep make_threshold_sweep(const ManufacturerTemplate& t, double vth, double sigma, Rng& rng) {
    IVSweep s;
    s.kind = SweepKind::ThresholdAtFixedVds;
    s.fixed_voltage_v = 0.1;
    // 81 points centered on vth, so a sample sits exactly at the criterion
    // crossing and extraction is exact for sigma = 0.
    for (int k = 0; k <= 80; ++k) {
        double v = vth - 2.0 + 0.05 * k;
        double i = kVthCriterion * std::exp((v - vth) / 0.3);
        if (sigma > 0.0 && k != 40) i *= 1.0 + sigma * rng.normal();
        s.points.push_back({v, i});
    }
    (void)t;
    return s;
}

IVSweep make_vgs_sweep(const ManufacturerTemplate& t, double sigma, Rng& rng) {
    IVSweep s;
    s.kind = SweepKind::GateSourceAtVds0;
    for (int k = 0; k <= 100; ++k) {
        double v = -5.0 + 0.1 * k;
        double i = t.vgs_gain * (std::exp(v / t.vgs_scale) - 1.0) * 1e-6;
        if (sigma > 0.0) i += sigma * t.vgs_gain * 1e-6 * rng.normal();
        s.points.push_back({v, i});
    }
    return s;
}

IVSweep make_vds_sweep(const ManufacturerTemplate& t, double sigma, Rng& rng) {
    IVSweep s;
    s.kind = SweepKind::DrainSourceAtVgs0;
    for (int k = 0; k <= 100; ++k) {
        double v = -5.0 + 0.1 * k;
        double i = t.vds_gain * std::tanh(v / t.vds_scale) * 1e-3;
        if (sigma > 0.0) i += sigma * t.vds_gain * 1e-3 * rng.normal();
        s.points.push_back({v, i});
    }
    return s;
}

}  // namespace

StressCondition default_condition(const SynthManifest& manifest, int index) {
    StressCondition c;
    c.temperature_c = index % 2 == 1 ? 25.0 : 150.0;
    c.bias_voltage_v =
        manifest.bias_levels_v[static_cast<std::size_t>((index - 1)) % manifest.bias_levels_v.size()];
    return c;
}

double device_failure_latent(const SynthManifest& manifest, int manufacturer, int index,
                             const StressCondition& condition) {
    return draw_device(manifest, manufacturer, index, condition).latent;
}

std::pair<DeviceRecord, GroundTruth> generate_device(const SynthManifest& manifest,
                                                     int manufacturer, int index,
                                                     const StressCondition& condition,
                                                     double fail_threshold) {
    if (manufacturer < 0 || manufacturer >= 26)
        throw DomainError("generate_device: manufacturer out of range");
    ManufacturerTemplate t = manufacturer_template(manufacturer);
    DeviceDraws d = draw_device(manifest, manufacturer, index, condition);
    bool fails = d.latent > fail_threshold;

    DeviceRecord rec;
    rec.id = DeviceId{static_cast<char>('A' + manufacturer), index};
    rec.condition = condition;
    rec.threshold_voltage_v = d.vth;

    Rng rng = d.noise_rng;
    double sigma = manifest.noise_sigma;
    rec.pre_sweeps.push_back(make_threshold_sweep(t, d.vth, sigma, rng));
    rec.pre_sweeps.push_back(make_vgs_sweep(t, sigma, rng));
    rec.pre_sweeps.push_back(make_vds_sweep(t, sigma, rng));

    double drop_fluence = (0.2 + 0.7 * d.loc_sig) * kGridEnd;
    double drop_width = 0.015 * kGridEnd;

    rec.trace.flux_ncm2s = manifest.flux_ncm2s;
    int n = std::max(manifest.trace_points, 8);
    for (int k = 0; k < n; ++k) {
        double phi = d.fluence_end * static_cast<double>(k) / static_cast<double>(n - 1);
        double level = 1.0;
        if (fails) level -= d.depth * sigmoid((phi - drop_fluence) / drop_width);
        double i = t.baseline_current * level;
        if (sigma > 0.0) i *= 1.0 + sigma * rng.normal();
        rec.trace.points.push_back({phi, i});
    }

    rec.status = fails ? DeviceStatus::fail() : DeviceStatus::pass();

    GroundTruth truth;
    truth.id = rec.id;
    truth.status = rec.status;
    truth.drop_fluence_ncm2 = fails ? drop_fluence : 0.0;
    truth.planted_vth_v = d.vth;
    return {std::move(rec), std::move(truth)};
}

std::pair<DeviceRecord, GroundTruth> inject_outlier(const DeviceRecord& record,
                                                    const GroundTruth& truth, OutlierClass cls,
                                                    std::uint64_t seed) {
    DeviceRecord rec = record;
    GroundTruth out = truth;
    out.injected_class = cls;
    out.injected_point_indices.clear();
    rec.status = DeviceStatus::outlier(cls);
    out.status = rec.status;

    Rng rng(seed);
    auto& pts = rec.trace.points;
    std::size_t n = pts.size();
    double fe = pts.back().fluence_ncm2;

    // Baseline current of the incoming trace (median of the first 5 points).
    std::vector<double> head;
    for (std::size_t i = 0; i < std::min<std::size_t>(5, n); ++i) head.push_back(pts[i].current_a);
    std::sort(head.begin(), head.end());
    double i0 = head[head.size() / 2];

    switch (cls) {
        case OutlierClass::InstantCurrentDecline: {
            double center = 0.02 * kGridEnd;
            double width = 0.003 * kGridEnd;
            for (auto& p : pts) {
                double factor = 1.0 - 0.6 * sigmoid((p.fluence_ncm2 - center) / width);
                p.current_a *= factor;
            }
            break;
        }
        case OutlierClass::LittleDataAtDecline: {
            // Overwrite the curve: flat at the baseline, then a near-step fall
            // to 30% with (almost) no samples inside the transition band. The
            // base curve's own decline would otherwise populate the band.
            double center = 0.5 * kGridEnd;
            double width = fe / static_cast<double>(n) * 0.2;
            for (auto& p : pts) {
                double factor = 1.0 - 0.7 * sigmoid((p.fluence_ncm2 - center) / width);
                p.current_a = i0 * factor * (1.0 + 0.01 * rng.normal());
            }
            break;
        }
        case OutlierClass::CurrentJump: {
            double jump_at = 0.5 * fe;
            for (auto& p : pts) {
                if (p.fluence_ncm2 > jump_at) p.current_a *= 3.5;
            }
            break;
        }
        case OutlierClass::Cloud: {
            // Insert isolated scatter points (never adjacent to each other)
            // totalling ~40% of the original count.
            std::size_t want = n * 2 / 5;
            std::vector<std::size_t> slots;  // base index to insert after
            for (std::size_t i = 2; i + 3 < n; i += 2) slots.push_back(i);
            rng.shuffle(slots);
            if (want > slots.size()) want = slots.size();
            slots.resize(want);
            std::sort(slots.begin(), slots.end());

            std::vector<TracePoint> merged;
            merged.reserve(n + want);
            std::size_t s = 0;
            for (std::size_t i = 0; i < n; ++i) {
                merged.push_back(pts[i]);
                if (s < slots.size() && slots[s] == i) {
                    bool low_side = rng.uniform() < 0.5;
                    double factor = low_side ? rng.uniform(0.55, 0.8) : rng.uniform(1.25, 1.9);
                    double phi = 0.5 * (pts[i].fluence_ncm2 + pts[i + 1].fluence_ncm2);
                    out.injected_point_indices.push_back(merged.size());
                    merged.push_back({phi, i0 * factor});
                    ++s;
                }
            }
            pts = std::move(merged);
            break;
        }
        case OutlierClass::OddCurve: {
            // Overwrite with the dip-then-overshoot shape anchored at the
            // baseline, so a failing base curve cannot flatten the rise.
            double fall_lo = 0.30 * fe, fall_hi = 0.45 * fe, rise_hi = 0.70 * fe;
            for (auto& p : pts) {
                double phi = p.fluence_ncm2;
                double factor = 1.0;
                if (phi >= fall_lo && phi < fall_hi) {
                    factor = 1.0 - 0.2 * (phi - fall_lo) / (fall_hi - fall_lo);
                } else if (phi >= fall_hi && phi < rise_hi) {
                    factor = 0.8 + 1.0 * (phi - fall_hi) / (rise_hi - fall_hi);
                } else if (phi >= rise_hi) {
                    factor = 1.8;
                }
                p.current_a = i0 * factor * (1.0 + 0.01 * rng.normal());
            }
            break;
        }
        case OutlierClass::OddBeginningCurrent: {
            for (auto& p : pts) p.current_a *= 25.0;
            break;
        }
    }
    return {std::move(rec), std::move(out)};
}

SynthCorpus generate_corpus(const SynthManifest& manifest) {
    if (manifest.manufacturer_count < 1 || manifest.manufacturer_count > 26)
        throw DomainError("generate_corpus: manufacturer_count must be in 1..26");
    if (manifest.devices_per_manufacturer < 1)
        throw DomainError("generate_corpus: devices_per_manufacturer must be >= 1");
    if (manifest.failure_fraction < 0.0 || manifest.failure_fraction > 1.0)
        throw DomainError("generate_corpus: failure_fraction must be in [0, 1]");

    int n = manifest.device_count();

    // Pass 1: latents, then the empirical threshold hitting failure_fraction.
    std::vector<double> latents;
    latents.reserve(static_cast<std::size_t>(n));
    for (int m = 0; m < manifest.manufacturer_count; ++m) {
        for (int i = 1; i <= manifest.devices_per_manufacturer; ++i) {
            latents.push_back(device_failure_latent(manifest, m, i, default_condition(manifest, i)));
        }
    }
    int n_fail = static_cast<int>(std::lround(manifest.failure_fraction * n));
    double threshold;
    if (n_fail <= 0) {
        threshold = std::numeric_limits<double>::infinity();
    } else if (n_fail >= n) {
        threshold = -std::numeric_limits<double>::infinity();
    } else {
        std::vector<double> sorted = latents;
        std::sort(sorted.begin(), sorted.end());
        // devices strictly above the threshold fail; place it between ranks
        double hi = sorted[static_cast<std::size_t>(n - n_fail)];
        double lo = sorted[static_cast<std::size_t>(n - n_fail - 1)];
        threshold = 0.5 * (lo + hi);
    }

    SynthCorpus corpus;
    for (int m = 0; m < manifest.manufacturer_count; ++m) {
        for (int i = 1; i <= manifest.devices_per_manufacturer; ++i) {
            auto [rec, truth] =
                generate_device(manifest, m, i, default_condition(manifest, i), threshold);
            corpus.records.push_back(std::move(rec));
            corpus.truths.push_back(std::move(truth));
        }
    }

    // Outlier injection: round(rate * n) devices per class, spread over a
    // seeded shuffle of the corpus.
    Rng inj_rng = Rng(manifest.seed).split(0xabcdef);
    std::vector<std::size_t> order(corpus.records.size());
    std::iota(order.begin(), order.end(), 0);
    inj_rng.shuffle(order);
    std::size_t cursor = 0;
    for (int c = 0; c < kOutlierClassCount; ++c) {
        auto cls = static_cast<OutlierClass>(c);
        int count = static_cast<int>(std::lround(manifest.outlier_rates[static_cast<std::size_t>(c)] * n));
        for (int k = 0; k < count && cursor < order.size(); ++k, ++cursor) {
            std::size_t idx = order[cursor];
            auto [rec, truth] = inject_outlier(corpus.records[idx], corpus.truths[idx], cls,
                                               inj_rng.next_u64());
            corpus.records[idx] = std::move(rec);
            corpus.truths[idx] = std::move(truth);
        }
    }
    return corpus;
}

SynthManifest load_synth_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open synth manifest: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("synth manifest " + path.string() + ": " + e.what());
    }

    SynthManifest m;
    m.manufacturer_count = j.value("manufacturer_count", m.manufacturer_count);
    m.devices_per_manufacturer = j.value("devices_per_manufacturer", m.devices_per_manufacturer);
    if (j.contains("bias_levels_v")) m.bias_levels_v = j.at("bias_levels_v").get<std::vector<double>>();
    m.failure_fraction = j.value("failure_fraction", m.failure_fraction);
    m.noise_sigma = j.value("noise_sigma", m.noise_sigma);
    m.signal_strength = j.value("signal_strength", m.signal_strength);
    m.vth_spread_v = j.value("vth_spread_v", m.vth_spread_v);
    m.drop_location_noise = j.value("drop_location_noise", m.drop_location_noise);
    m.flux_ncm2s = j.value("flux_ncm2s", m.flux_ncm2s);
    m.trace_points = j.value("trace_points", m.trace_points);
    m.seed = j.value("seed", m.seed);
    if (j.contains("outlier_rates")) {
        auto rates = j.at("outlier_rates").get<std::vector<double>>();
        if (rates.size() != kOutlierClassCount)
            throw FormatError("synth manifest: outlier_rates must have 6 entries");
        std::copy(rates.begin(), rates.end(), m.outlier_rates.begin());
    }
    return m;
}

void write_synth_manifest(const SynthManifest& m, const std::filesystem::path& path) {
    json j;
    j["manufacturer_count"] = m.manufacturer_count;
    j["devices_per_manufacturer"] = m.devices_per_manufacturer;
    j["bias_levels_v"] = m.bias_levels_v;
    j["failure_fraction"] = m.failure_fraction;
    j["noise_sigma"] = m.noise_sigma;
    j["signal_strength"] = m.signal_strength;
    j["vth_spread_v"] = m.vth_spread_v;
    j["drop_location_noise"] = m.drop_location_noise;
    j["flux_ncm2s"] = m.flux_ncm2s;
    j["trace_points"] = m.trace_points;
    j["seed"] = m.seed;
    j["outlier_rates"] = std::vector<double>(m.outlier_rates.begin(), m.outlier_rates.end());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write synth manifest: " + path.string());
    out << j.dump(2) << "\n";
}

void write_corpus_files(const SynthCorpus& corpus, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    auto write_sweep = [&](const std::filesystem::path& p, const IVSweep& s) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw IoError("cannot write " + p.string());
        f << "voltage_v,current_a\n";
        for (const auto& pt : s.points)
            f << format_double(pt.voltage_v) << ',' << format_double(pt.current_a) << '\n';
    };

    RawDatasetManifest manifest;
    manifest.root = dir;
    for (const auto& rec : corpus.records) {
        std::string base = rec.id.render();
        ManifestEntry e;
        e.id = rec.id;
        e.condition = rec.condition;
        e.flux_ncm2s = rec.trace.flux_ncm2s;
        const IVSweep* th = rec.find_pre_sweep(SweepKind::ThresholdAtFixedVds);
        e.threshold_fixed_vds_v = th && th->fixed_voltage_v ? *th->fixed_voltage_v : 0.0;
        e.pre_threshold = base + "_pre_vth.csv";
        e.pre_vgs_igs = base + "_pre_vgs.csv";
        e.pre_vds_ids = base + "_pre_vds.csv";
        e.trace = base + "_trace.csv";

        write_sweep(dir / e.pre_threshold, *th);
        write_sweep(dir / e.pre_vgs_igs, *rec.find_pre_sweep(SweepKind::GateSourceAtVds0));
        write_sweep(dir / e.pre_vds_ids, *rec.find_pre_sweep(SweepKind::DrainSourceAtVgs0));
        {
            std::ofstream f(dir / e.trace, std::ios::binary);
            if (!f) throw IoError("cannot write trace for " + base);
            f << "fluence_ncm2,current_a\n";
            for (const auto& pt : rec.trace.points)
                f << format_double(pt.fluence_ncm2) << ',' << format_double(pt.current_a) << '\n';
        }
        manifest.entries.push_back(std::move(e));
    }
    write_manifest(manifest, dir / "manifest.json");

    std::ofstream gt(dir / "ground_truth.csv", std::ios::binary);
    if (!gt) throw IoError("cannot write ground_truth.csv");
    gt << "device_id,status,drop_fluence_ncm2,planted_vth_v,outlier_class\n";
    for (const auto& t : corpus.truths) {
        gt << t.id.render() << ',' << t.status.render() << ','
           << format_double(t.drop_fluence_ncm2) << ',' << format_double(t.planted_vth_v) << ','
           << (t.injected_class ? to_string(*t.injected_class) : std::string("none")) << '\n';
    }
}

}  // namespace radfit
