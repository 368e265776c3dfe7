#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "peclab/config.hpp"
#include "peclab/errors.hpp"
#include "peclab/jsonio.hpp"
#include "peclab/rng.hpp"
#include "peclab/runreport.hpp"
#include "peclab/textio.hpp"

using namespace peclab;
namespace fs = std::filesystem;

namespace {
struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("peclab_io_" + std::to_string(SplitMix64(::getpid()).next_u64() % 1000000));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};
}  // namespace

TEST_CASE("format_double: 17 significant digits, bit-exact round-trips") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(13.3) == "13.300000000000001");
    CHECK(format_double(0.0) == "0");
    for (double v : {1.0 / 3.0, 0.6484988452655889, 1e-17, -2.75, 6.02214076e23, 13.3}) {
        const std::string s = format_double(v);
        CHECK(parse_double(s, "round trip") == v);
    }
}

TEST_CASE("csv: header, ragged-row line numbers, parse errors") {
    TempDir tmp;
    const std::string path = tmp.file("t.csv");
    write_csv(path, {"a", "b"}, {{"1", "2"}, {"3", "4"}});
    const CsvTable t = read_csv(path);
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    CHECK(t.rows.size() == 2);
    CHECK(t.column("b") == 1);
    CHECK(t.column("missing") == -1);

    write_text_file(path, "a,b\n1,2\n3\n");
    try {
        read_csv(path);
        FAIL("expected ragged-row rejection");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_double("1.2.3", "t"), ValidationError);
    CHECK_THROWS_AS(parse_long("7x", "t"), ValidationError);
    CHECK_THROWS_AS(read_csv(tmp.file("absent.csv")), IoError);
}

TEST_CASE("pgm export writes a valid P5 header and payload") {
    TempDir tmp;
    RasterGrid g(4, 2, 5.0);
    g.at(0, 0) = 1.0;
    g.at(3, 1) = 1.0;
    const std::string path = tmp.file("m.pgm");
    write_pgm(path, g);
    const std::string data = read_text_file(path);
    CHECK(data.rfind("P5\n4 2\n255\n", 0) == 0);
    CHECK(data.size() == 11 + 8);
    CHECK(static_cast<unsigned char>(data[11]) == 255);
    CHECK(static_cast<unsigned char>(data[12]) == 0);
}

TEST_CASE("grid and kernel csv exports") {
    TempDir tmp;
    RasterGrid g(3, 2, 5.0);
    g.at(1, 0) = 0.25;
    write_grid_csv(tmp.file("g.csv"), g);
    CHECK(read_text_file(tmp.file("g.csv")) == "0,0.25,0\n0,0,0\n");

    const Kernel k = make_psf_kernel(PsfParams{10, 20, 1}, 5.0);
    write_kernel_csv(tmp.file("k.csv"), k);
    const CsvTable kt = read_csv(tmp.file("k.csv"));
    CHECK(kt.header.size() == static_cast<std::size_t>(k.side()));
}

TEST_CASE("svg plots carry polylines and guides") {
    SvgPlot plot(0.0, 1.0, 0.0, 1.0, "x", "y");
    plot.add_hline(0.5, "#888888");
    plot.add_polyline({{0.0, 0.1}, {0.5, 0.9}, {1.0, 0.2}}, "#1f77b4");
    const std::string svg = plot.render();
    CHECK(svg.find("<svg") == 0);
    std::size_t npoly = 0, pos = 0;
    while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
        ++npoly;
        ++pos;
    }
    CHECK(npoly == 1);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
    CHECK_THROWS_AS(SvgPlot(0.0, 1.0, 0.0, 1.0, "x", "y", true), ValidationError);
}

TEST_CASE("config: defaults validate, unknown keys rejected, overrides bind") {
    const Config def;
    CHECK_NOTHROW(def.validate());

    const Config cfg = Config::from_text("psf.eta = 3.5\nseed=9\nfit.ridge = 0.01\n");
    CHECK(cfg.psf.eta == 3.5);
    CHECK(cfg.seed == 9);
    CHECK(cfg.ridge == 0.01);

    CHECK_THROWS_AS(Config::from_text("psf.gamma = 1\n"), ValidationError);
    CHECK_THROWS_AS(Config::from_text("just words\n"), ValidationError);
    CHECK_THROWS_AS(Config::from_text("psf.beta_nm = 10\n"), ValidationError);  // beta < alpha
    CHECK_NOTHROW(Config::from_text("# comment only\n\n"));
}

TEST_CASE("config hash tracks content, not formatting") {
    const Config a = Config::from_text("psf.eta = 5\nseed = 42\n");
    const Config b = Config::from_text("seed=42\n# note\npsf.eta=5.0\n");
    const Config c = Config::from_text("seed = 43\n");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash() == Config().hash());  // defaults spelled out == defaults
    CHECK(a.hash() != c.hash());
    CHECK(a.hash().size() == 16);
}

TEST_CASE("layout json: schema round trip and validation") {
    TempDir tmp;
    const Layout a = lead_array(3, 70.0, 21.0, 210.0, "trio");
    const std::string path = tmp.file("a.json");
    save_layout(path, a);

    const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
    CHECK(j["units"] == "nm");
    CHECK(j["name"] == "trio");
    CHECK(j["rects"].size() == 3);
    CHECK(j.size() == 3);  // exactly {name, units, rects}

    const Layout b = load_layout(path);
    CHECK(b.rects.size() == 3);
    CHECK(b.rects[2].x == doctest::Approx(140.0));
    // loaded bbox is the tight union, not the generator cell
    CHECK(b.bbox.w == doctest::Approx(161.0));

    write_text_file(path, R"({"name":"x","units":"um","rects":[{"x":0,"y":0,"w":1,"h":1}]})");
    CHECK_THROWS_AS(load_layout(path), ValidationError);
    write_text_file(path, R"({"name":"x","units":"nm","rects":[]})");
    CHECK_THROWS_AS(load_layout(path), ValidationError);
    write_text_file(path, "not json");
    CHECK_THROWS_AS(load_layout(path), ValidationError);
}

TEST_CASE("model and eta-fit json round trips") {
    TempDir tmp;
    LogisticModel m;
    m.features.mean = {1, 50, 15, 48, 2};
    m.features.scale = {0.5, 17, 6, 32, 0.6};
    for (int i = 0; i < kFeatureCount; ++i) m.weights[i] = 0.01 * i - 0.05;
    m.intercept = -1.25;
    m.ridge = 1e-3;
    m.iterations = 11;
    m.grad_norm = 3e-9;
    m.converged = true;
    m.holdout_accuracy = 0.917;
    m.n_train = 4000;
    m.n_holdout = 1000;
    save_model(tmp.file("m.json"), m);
    const LogisticModel r = load_model(tmp.file("m.json"));
    CHECK(r.weights == m.weights);
    CHECK(r.intercept == m.intercept);
    CHECK(r.holdout_accuracy == m.holdout_accuracy);
    CHECK(r.features.scale == m.features.scale);

    EtaFit fit;
    fit.eta = 4.2168674698795178;
    fit.a = 0.6484988452655889;
    fit.r_squared = 1.0;
    fit.n_points = 2;
    fit.robust_weights = {1.0, 1.0};
    save_eta_fit(tmp.file("e.json"), fit);
    const EtaFit rf = load_eta_fit(tmp.file("e.json"));
    CHECK(rf.eta == fit.eta);
    CHECK(rf.a == fit.a);
    CHECK(rf.robust_weights == fit.robust_weights);

    write_text_file(tmp.file("bad.json"), R"({"eta": -2, "A": 1.0})");
    CHECK_THROWS_AS(load_eta_fit(tmp.file("bad.json")), ValidationError);
}

TEST_CASE("run reports append one json line per run") {
    TempDir tmp;
    const std::string primary = tmp.file("out.csv");
    write_text_file(primary, "x\n");

    RunReport r;
    r.command = "sweep";
    r.config_hash = "deadbeefdeadbeef";
    r.input_digests = {{"in.csv", file_digest(primary)}};
    r.outputs = {primary};
    r.wall_ms = 12.5;
    r.seed = 42;
    append_run_report(r, primary);
    append_run_report(r, primary);

    std::ifstream in(tmp.file("runs.jsonl"));
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["command"] == "sweep");
        CHECK(j["outputs"][0] == primary);
        CHECK(j["seed"] == 42);
        ++lines;
    }
    CHECK(lines == 2);
}
