#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "radfit/errors.hpp"
#include "radfit/ingest.hpp"
#include "radfit/synthgen.hpp"

using namespace radfit;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("radfit_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

SynthManifest small_manifest() {
    SynthManifest m;
    m.manufacturer_count = 2;
    m.devices_per_manufacturer = 4;
    m.trace_points = 60;
    m.outlier_rates = {0, 0, 0, 0, 0, 0};
    return m;
}

}  // namespace

TEST_CASE("static sweep csv parses two points") {
    std::istringstream in("v,i\n0,0\n1,1e-3\n");
    IVSweep s = parse_static_sweep_csv(in, SweepKind::GateSourceAtVds0);
    REQUIRE(s.points.size() == 2);
    CHECK(s.points[0].voltage_v == 0.0);
    CHECK(s.points[1].current_a == 1e-3);
}

TEST_CASE("static sweep csv sorts by voltage") {
    std::istringstream in("v,i\n1,2e-3\n0,1e-3\n");
    IVSweep s = parse_static_sweep_csv(in, SweepKind::GateSourceAtVds0);
    REQUIRE(s.points.size() == 2);
    CHECK(s.points[0].voltage_v == 0.0);
    CHECK(s.points[1].voltage_v == 1.0);
}

TEST_CASE("static sweep parse error names the line") {
    std::istringstream in("v,i\n0,0\nabc\n");
    try {
        parse_static_sweep_csv(in, SweepKind::GateSourceAtVds0);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("3") != std::string::npos);
    }
}

TEST_CASE("stress trace csv parses constant trace") {
    std::istringstream in("f,i\n0,1.0\n6e9,1.0\n");
    StressTrace t = parse_stress_trace_csv(in, 1e6);
    REQUIRE(t.points.size() == 2);
    CHECK(t.flux_ncm2s == 1e6);
    CHECK(t.points[1].fluence_ncm2 == 6e9);
}

TEST_CASE("stress trace csv sorts unsorted rows") {
    std::istringstream in("f,i\n5,2.0\n1,1.0\n3,1.5\n");
    StressTrace t = parse_stress_trace_csv(in, 1e6);
    REQUIRE(t.points.size() == 3);
    CHECK(t.points[0].fluence_ncm2 == 1.0);
    CHECK(t.points[2].fluence_ncm2 == 5.0);
}

TEST_CASE("negative fluence is rejected") {
    std::istringstream in("f,i\n-1,1.0\n1,1.0\n");
    CHECK_THROWS_AS(parse_stress_trace_csv(in, 1e6), DataError);
}

TEST_CASE("empty manifest loads to empty dataset") {
    fs::path dir = temp_dir("empty_manifest");
    {
        std::ofstream out(dir / "manifest.json");
        out << "{\"devices\": []}\n";
    }
    RawDatasetManifest m = load_manifest(dir / "manifest.json");
    CHECK(m.entries.empty());
    CHECK(load_dataset(m).empty());
}

TEST_CASE("synthetic corpus round trips through the raw files") {
    SynthManifest sm = small_manifest();
    SynthCorpus corpus = generate_corpus(sm);
    fs::path dir = temp_dir("roundtrip");
    write_corpus_files(corpus, dir);

    RawDatasetManifest m = load_manifest(dir / "manifest.json");
    std::vector<DeviceRecord> loaded = load_dataset(m);
    REQUIRE(loaded.size() == corpus.records.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        const DeviceRecord& a = corpus.records[i];
        const DeviceRecord& b = loaded[i];
        CHECK(a.id == b.id);
        CHECK(a.condition.temperature_c == b.condition.temperature_c);
        CHECK(a.condition.bias_voltage_v == b.condition.bias_voltage_v);
        REQUIRE(a.trace.points.size() == b.trace.points.size());
        for (std::size_t k = 0; k < a.trace.points.size(); ++k) {
            CHECK(a.trace.points[k].fluence_ncm2 == b.trace.points[k].fluence_ncm2);
            CHECK(a.trace.points[k].current_a == b.trace.points[k].current_a);
        }
        REQUIRE(a.pre_sweeps.size() == b.pre_sweeps.size());
        for (std::size_t s = 0; s < a.pre_sweeps.size(); ++s) {
            REQUIRE(a.pre_sweeps[s].points.size() == b.pre_sweeps[s].points.size());
            for (std::size_t k = 0; k < a.pre_sweeps[s].points.size(); ++k) {
                CHECK(a.pre_sweeps[s].points[k].voltage_v ==
                      b.pre_sweeps[s].points[k].voltage_v);
                CHECK(a.pre_sweeps[s].points[k].current_a ==
                      b.pre_sweeps[s].points[k].current_a);
            }
        }
    }
}

TEST_CASE("missing trace file is an io error") {
    SynthManifest sm = small_manifest();
    SynthCorpus corpus = generate_corpus(sm);
    fs::path dir = temp_dir("missing_file");
    write_corpus_files(corpus, dir);
    fs::remove(dir / "A_1_trace.csv");
    RawDatasetManifest m = load_manifest(dir / "manifest.json");
    CHECK_THROWS_AS(load_dataset(m), IoError);
}

TEST_CASE("clean corpus validates with zero issues") {
    SynthCorpus corpus = generate_corpus(small_manifest());
    CHECK(validate_dataset(corpus.records).clean());
}

TEST_CASE("missing drain-source sweep is reported against the device") {
    SynthCorpus corpus = generate_corpus(small_manifest());
    auto& sweeps = corpus.records[2].pre_sweeps;
    sweeps.erase(std::remove_if(sweeps.begin(), sweeps.end(),
                                [](const IVSweep& s) {
                                    return s.kind == SweepKind::DrainSourceAtVgs0;
                                }),
                 sweeps.end());
    ValidationReport r = validate_dataset(corpus.records);
    REQUIRE(r.issues.size() == 1);
    CHECK(r.issues[0].id == corpus.records[2].id);
}

TEST_CASE("zero flux is a validation issue") {
    SynthCorpus corpus = generate_corpus(small_manifest());
    corpus.records[0].trace.flux_ncm2s = 0.0;
    ValidationReport r = validate_dataset(corpus.records);
    REQUIRE(r.issues.size() == 1);
    CHECK(std::string(r.issues[0].message).find("flux") != std::string::npos);
}

TEST_CASE("empty pipeline file round trips") {
    fs::path dir = temp_dir("pipe_empty");
    PipelineFile f;
    f.grids = default_grid_set();
    write_pipeline_file(f, dir / "p.csv");
    PipelineFile g = load_pipeline_file(dir / "p.csv");
    CHECK(g.rows.empty());
    CHECK(g.grids.fluence_grid.positions == f.grids.fluence_grid.positions);
}

TEST_CASE("pipeline file round trips bitwise") {
    SynthCorpus corpus = generate_corpus(small_manifest());
    PipelineFile f;
    f.grids = default_grid_set();
    f.rows = build_pipeline_rows(corpus.records, f.grids);
    fs::path dir = temp_dir("pipe_bits");
    write_pipeline_file(f, dir / "a.csv");
    PipelineFile g = load_pipeline_file(dir / "a.csv");
    write_pipeline_file(g, dir / "b.csv");
    std::ifstream a(dir / "a.csv", std::ios::binary), b(dir / "b.csv", std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(!sa.str().empty());
}

TEST_CASE("truncated pipeline row is a format error") {
    SynthCorpus corpus = generate_corpus(small_manifest());
    PipelineFile f;
    f.grids = default_grid_set();
    f.rows = build_pipeline_rows(corpus.records, f.grids);
    fs::path dir = temp_dir("pipe_trunc");
    write_pipeline_file(f, dir / "p.csv");

    std::ifstream in(dir / "p.csv");
    std::string content((std::istreambuf_iterator<char>(in)), {});
    in.close();
    // drop the last column of the final row
    std::size_t last_comma = content.rfind(',');
    content.erase(last_comma);
    content += "\n";
    std::ofstream out(dir / "p.csv", std::ios::binary);
    out << content;
    out.close();
    CHECK_THROWS_AS(load_pipeline_file(dir / "p.csv"), FormatError);
}
