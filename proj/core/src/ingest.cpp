#include "radfit/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "radfit/errors.hpp"
#include "radfit/text.hpp"

namespace radfit {

namespace {

using nlohmann::json;

std::filesystem::path json_path(const json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("manifest entry missing field '") + key + "'");
    return std::filesystem::path(j.at(key).get<std::string>());
}

std::vector<std::pair<double, double>> parse_two_column_csv(std::istream& in,
                                                            const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(std::string(what) + ": empty input");
    std::vector<std::pair<double, double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw ParseError(std::string(what) + ": line " + std::to_string(line_no) +
                             ": expected 2 columns, got " + std::to_string(fields.size()));
        try {
            rows.emplace_back(parse_double(fields[0]), parse_double(fields[1]));
        } catch (const ParseError& e) {
            throw ParseError(std::string(what) + ": line " + std::to_string(line_no) + ": " +
                             e.what());
        }
    }
    return rows;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path.string());
    return in;
}

}  // namespace

IVSweep parse_static_sweep_csv(std::istream& in, SweepKind kind,
                               std::optional<double> fixed_voltage) {
    auto rows = parse_two_column_csv(in, "static sweep");
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    IVSweep sweep;
    sweep.kind = kind;
    sweep.fixed_voltage_v = kind == SweepKind::ThresholdAtFixedVds
                                ? std::optional<double>(fixed_voltage.value_or(0.0))
                                : std::nullopt;

    // Collapse duplicate voltages by averaging their currents.
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i;
        double sum = 0.0;
        while (j < rows.size() && rows[j].first == rows[i].first) sum += rows[j++].second;
        sweep.points.push_back({rows[i].first, sum / static_cast<double>(j - i)});
        i = j;
    }
    if (sweep.points.size() < 2) throw DataError("static sweep: fewer than 2 distinct voltages");
    return sweep;
}

StressTrace parse_stress_trace_csv(std::istream& in, double flux_ncm2s) {
    auto rows = parse_two_column_csv(in, "stress trace");
    for (const auto& [f, c] : rows) {
        if (f < 0.0) throw DataError("stress trace: negative fluence " + format_double(f));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    if (rows.size() < 2) throw DataError("stress trace: fewer than 2 points");

    StressTrace trace;
    trace.flux_ncm2s = flux_ncm2s;
    trace.points.reserve(rows.size());
    for (const auto& [f, c] : rows) trace.points.push_back({f, c});
    return trace;
}

RawDatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("manifest " + path.string() + ": " + e.what());
    }

    RawDatasetManifest manifest;
    std::filesystem::path root(j.value("root", std::string(".")));
    if (root.is_relative()) root = path.parent_path() / root;
    manifest.root = root;

    for (const auto& d : j.at("devices")) {
        ManifestEntry e;
        e.id = DeviceId::parse(d.at("id").get<std::string>());
        e.condition.temperature_c = d.at("temperature_c").get<double>();
        e.condition.bias_voltage_v = d.at("bias_voltage_v").get<double>();
        e.flux_ncm2s = d.at("flux_ncm2s").get<double>();
        e.threshold_fixed_vds_v = d.value("threshold_fixed_vds_v", 0.0);
        const auto& pre = d.at("pre");
        e.pre_threshold = json_path(pre, "threshold");
        e.pre_vgs_igs = json_path(pre, "vgs_igs");
        e.pre_vds_ids = json_path(pre, "vds_ids");
        if (d.contains("post")) {
            const auto& post = d.at("post");
            if (post.contains("threshold")) e.post_threshold = json_path(post, "threshold");
            if (post.contains("vgs_igs")) e.post_vgs_igs = json_path(post, "vgs_igs");
            if (post.contains("vds_ids")) e.post_vds_ids = json_path(post, "vds_ids");
        }
        e.trace = json_path(d, "trace");
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

void write_manifest(const RawDatasetManifest& manifest, const std::filesystem::path& path) {
    json devices = json::array();
    for (const auto& e : manifest.entries) {
        json d;
        d["id"] = e.id.render();
        d["temperature_c"] = e.condition.temperature_c;
        d["bias_voltage_v"] = e.condition.bias_voltage_v;
        d["flux_ncm2s"] = e.flux_ncm2s;
        d["threshold_fixed_vds_v"] = e.threshold_fixed_vds_v;
        d["pre"] = {{"threshold", e.pre_threshold.generic_string()},
                    {"vgs_igs", e.pre_vgs_igs.generic_string()},
                    {"vds_ids", e.pre_vds_ids.generic_string()}};
        if (e.post_threshold || e.post_vgs_igs || e.post_vds_ids) {
            json post = json::object();
            if (e.post_threshold) post["threshold"] = e.post_threshold->generic_string();
            if (e.post_vgs_igs) post["vgs_igs"] = e.post_vgs_igs->generic_string();
            if (e.post_vds_ids) post["vds_ids"] = e.post_vds_ids->generic_string();
            d["post"] = post;
        }
        d["trace"] = e.trace.generic_string();
        devices.push_back(std::move(d));
    }
    json j;
    j["root"] = ".";
    j["devices"] = devices;

    std::ofstream out(path);
    if (!out) throw IoError("cannot write manifest: " + path.string());
    out << j.dump(2) << "\n";
}

std::vector<DeviceRecord> load_dataset(const RawDatasetManifest& manifest) {
    std::map<DeviceId, DeviceRecord> by_id;
    for (const auto& e : manifest.entries) {
        if (by_id.contains(e.id)) throw DataError("duplicate device id: " + e.id.render());

        auto resolve = [&](const std::filesystem::path& p) {
            return p.is_absolute() ? p : manifest.root / p;
        };
        auto read_sweep = [&](const std::filesystem::path& p, SweepKind kind,
                              std::optional<double> fixed) {
            std::ifstream in = open_or_throw(resolve(p));
            try {
                return parse_static_sweep_csv(in, kind, fixed);
            } catch (const Error& err) {
                throw DataError(resolve(p).string() + ": " + err.what());
            }
        };

        DeviceRecord rec;
        rec.id = e.id;
        rec.condition = e.condition;
        rec.pre_sweeps.push_back(
            read_sweep(e.pre_threshold, SweepKind::ThresholdAtFixedVds, e.threshold_fixed_vds_v));
        rec.pre_sweeps.push_back(read_sweep(e.pre_vgs_igs, SweepKind::GateSourceAtVds0, std::nullopt));
        rec.pre_sweeps.push_back(read_sweep(e.pre_vds_ids, SweepKind::DrainSourceAtVgs0, std::nullopt));
        if (e.post_threshold || e.post_vgs_igs || e.post_vds_ids) {
            std::vector<IVSweep> post;
            if (e.post_threshold)
                post.push_back(read_sweep(*e.post_threshold, SweepKind::ThresholdAtFixedVds,
                                          e.threshold_fixed_vds_v));
            if (e.post_vgs_igs)
                post.push_back(read_sweep(*e.post_vgs_igs, SweepKind::GateSourceAtVds0, std::nullopt));
            if (e.post_vds_ids)
                post.push_back(read_sweep(*e.post_vds_ids, SweepKind::DrainSourceAtVgs0, std::nullopt));
            rec.post_sweeps = std::move(post);
        }
        {
            std::ifstream in = open_or_throw(resolve(e.trace));
            try {
                rec.trace = parse_stress_trace_csv(in, e.flux_ncm2s);
            } catch (const Error& err) {
                throw DataError(resolve(e.trace).string() + ": " + err.what());
            }
        }
        rec.status = DeviceStatus::pass();  // placeholder until preprocessing
        by_id.emplace(e.id, std::move(rec));
    }

    std::vector<DeviceRecord> records;
    records.reserve(by_id.size());
    for (auto& [id, rec] : by_id) records.push_back(std::move(rec));
    return records;
}

ValidationReport validate_dataset(const std::vector<DeviceRecord>& records) {
    ValidationReport report;
    auto add = [&](const DeviceId& id, std::string msg) {
        report.issues.push_back({id, std::move(msg)});
    };
    for (const auto& r : records) {
        if (!r.find_pre_sweep(SweepKind::ThresholdAtFixedVds))
            add(r.id, "missing threshold sweep");
        if (!r.find_pre_sweep(SweepKind::GateSourceAtVds0))
            add(r.id, "missing gate-source sweep");
        if (!r.find_pre_sweep(SweepKind::DrainSourceAtVgs0))
            add(r.id, "missing drain-source sweep");
        for (const auto& s : r.pre_sweeps) {
            if (!s.valid()) add(r.id, "invalid " + to_string(s.kind) + " sweep");
        }
        if (!(r.trace.flux_ncm2s > 0.0)) add(r.id, "non-positive flux");
        double prev = -1.0;
        bool monotone = true;
        for (const auto& p : r.trace.points) {
            if (p.fluence_ncm2 < prev) monotone = false;
            prev = p.fluence_ncm2;
        }
        if (!monotone) add(r.id, "non-monotone fluence");
        if (r.trace.points.size() < 2) add(r.id, "trace has fewer than 2 points");
        if (!r.condition.valid()) add(r.id, "invalid stress condition");
    }
    return report;
}

namespace {

void write_grid(std::ostream& out, const char* name, const BenchmarkGrid& g) {
    out << ',' << name << ',' << g.count();
    for (double p : g.positions) out << ',' << format_double(p);
}

BenchmarkGrid read_grid(const std::vector<std::string>& fields, std::size_t& pos,
                        const char* name, GridAxis axis) {
    if (pos + 1 >= fields.size() || fields[pos] != name)
        throw FormatError(std::string("pipeline header: expected grid '") + name + "'");
    std::size_t count = static_cast<std::size_t>(parse_double(fields[pos + 1]));
    pos += 2;
    if (count < 2 || pos + count > fields.size())
        throw FormatError(std::string("pipeline header: bad count for grid '") + name + "'");
    BenchmarkGrid g;
    g.axis = axis;
    g.positions.reserve(count);
    for (std::size_t i = 0; i < count; ++i) g.positions.push_back(parse_double(fields[pos + i]));
    pos += count;
    for (std::size_t i = 1; i < g.positions.size(); ++i) {
        if (!(g.positions[i - 1] < g.positions[i]))
            throw FormatError(std::string("pipeline header: grid '") + name +
                              "' positions not strictly increasing");
    }
    return g;
}

}  // namespace

void write_pipeline_file(const PipelineFile& file, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "grids";
    write_grid(out, "vgs", file.grids.vgs_grid);
    write_grid(out, "vds", file.grids.vds_grid);
    write_grid(out, "flu", file.grids.fluence_grid);
    out << '\n';

    out << "device_id,manufacturer,temperature_c,bias_voltage_v,avg_vth_v";
    for (std::size_t k = 0; k < file.grids.vgs_grid.count(); ++k) out << ",vgsigs_" << k;
    for (std::size_t k = 0; k < file.grids.vds_grid.count(); ++k) out << ",vdsids_" << k;
    for (std::size_t k = 0; k < file.grids.fluence_grid.count(); ++k) out << ",flu_" << k;
    out << ",status\n";

    for (const auto& r : file.rows) {
        if (r.vgs_currents.size() != file.grids.vgs_grid.count() ||
            r.vds_currents.size() != file.grids.vds_grid.count() ||
            r.fluence_currents.size() != file.grids.fluence_grid.count())
            throw FormatError("pipeline row " + r.id.render() + " does not match the grids");
        out << r.id.render() << ',' << r.manufacturer << ',' << format_double(r.temperature_c)
            << ',' << format_double(r.bias_voltage_v) << ','
            << format_double(r.avg_threshold_voltage_v);
        for (double v : r.vgs_currents) out << ',' << format_double(v);
        for (double v : r.vds_currents) out << ',' << format_double(v);
        for (double v : r.fluence_currents) out << ',' << format_double(v);
        out << ',' << r.status.render() << '\n';
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write pipeline file: " + path.string());
    f << out.str();
}

PipelineFile load_pipeline_file(const std::filesystem::path& path) {
    std::ifstream in = open_or_throw(path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("pipeline file: missing grid header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_csv_line(line);
    if (fields.empty() || fields[0] != "grids")
        throw FormatError("pipeline file: first header line must start with 'grids'");

    PipelineFile file;
    std::size_t pos = 1;
    file.grids.vgs_grid = read_grid(fields, pos, "vgs", GridAxis::SweepVoltage);
    file.grids.vds_grid = read_grid(fields, pos, "vds", GridAxis::SweepVoltage);
    file.grids.fluence_grid = read_grid(fields, pos, "flu", GridAxis::Fluence);
    if (pos != fields.size()) throw FormatError("pipeline file: trailing grid header fields");

    if (!std::getline(in, line)) throw FormatError("pipeline file: missing column header");

    std::size_t expected = 5 + file.grids.vgs_grid.count() + file.grids.vds_grid.count() +
                           file.grids.fluence_grid.count() + 1;
    std::size_t row_index = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto cols = split_csv_line(line);
        if (cols.size() != expected)
            throw FormatError("pipeline file: row " + std::to_string(row_index) + " has " +
                              std::to_string(cols.size()) + " columns, expected " +
                              std::to_string(expected));
        PipelineRow r;
        r.id = DeviceId::parse(cols[0]);
        r.manufacturer = cols[1].size() == 1 ? cols[1][0] : '\0';
        if (r.manufacturer < 'A' || r.manufacturer > 'Z')
            throw FormatError("pipeline file: row " + std::to_string(row_index) +
                              ": bad manufacturer '" + cols[1] + "'");
        r.temperature_c = parse_double(cols[2]);
        r.bias_voltage_v = parse_double(cols[3]);
        r.avg_threshold_voltage_v = parse_double(cols[4]);
        std::size_t c = 5;
        for (std::size_t k = 0; k < file.grids.vgs_grid.count(); ++k)
            r.vgs_currents.push_back(parse_double(cols[c++]));
        for (std::size_t k = 0; k < file.grids.vds_grid.count(); ++k)
            r.vds_currents.push_back(parse_double(cols[c++]));
        for (std::size_t k = 0; k < file.grids.fluence_grid.count(); ++k)
            r.fluence_currents.push_back(parse_double(cols[c++]));
        r.status = DeviceStatus::parse(cols[c]);
        file.rows.push_back(std::move(r));
        ++row_index;
    }
    return file;
}

}  // namespace radfit
