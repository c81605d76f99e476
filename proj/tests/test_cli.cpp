#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "ricci_dynamo/cli/expression.hpp"
#include "ricci_dynamo/cli/result_table.hpp"
#include "ricci_dynamo/cli/runner.hpp"
#include "ricci_dynamo/cli/scenario.hpp"

using namespace ricci_dynamo;
using namespace ricci_dynamo::cli;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("ricci_dynamo_test_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kMinimal = R"(
model: reduced
parameters:
  R: -1
  theta: 1
  eta: {min: 1.0e-4, max: 1.0e-1, count: 4, scale: log}
outputs: [spectrum]
)";

} // namespace

TEST_CASE("expressions") {
    CHECK(Expression::parse("1 + 2 * 3")(0, 0) == 7.0);
    CHECK(Expression::parse("(1 + 2) * 3")(0, 0) == 9.0);
    CHECK(Expression::parse("-x - -y")(2.0, 5.0) == 3.0);
    CHECK(Expression::parse("2 * sin(x) * cos(y)")(std::numbers::pi / 2, 0.0) == doctest::Approx(2.0));
    CHECK(Expression::parse("exp(0) / 4")(0, 0) == 0.25);
    CHECK(Expression::parse("pi")(0, 0) == std::numbers::pi);
    CHECK(Expression::parse("1.5e-1*x")(2.0, 0.0) == doctest::Approx(0.3));
    CHECK(Expression::parse("8 - 2 - 1")(0, 0) == 5.0);
    CHECK(Expression::parse("8 / 2 / 2")(0, 0) == 2.0);
    for (const char* bad : {"", "1 +", "sin x", "foo(1)", "(1", "1)", "2 $ 3", "tan(x)"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(Expression::parse(bad), ExpressionError);
    }
}

TEST_CASE("sweep ranges") {
    SweepRange lin{0.0, 1.0, 5, SweepRange::Scale::Linear};
    const auto v = lin.values();
    REQUIRE(v.size() == 5);
    CHECK(v[2] == 0.5);
    CHECK(v.back() == 1.0);
    SweepRange lg{1e-4, 1e-1, 4, SweepRange::Scale::Log};
    const auto w = lg.values();
    CHECK(w.front() == 1e-4);
    CHECK(w[1] == doctest::Approx(1e-3));
    CHECK(w[2] == doctest::Approx(1e-2));
    CHECK(w.back() == 1e-1);
}

TEST_CASE("scenario parsing with defaults") {
    const auto s = parse_scenario(kMinimal);
    CHECK(s.model == Model::Reduced);
    CHECK(s.has("R"));
    CHECK_FALSE(s.has("rho"));
    CHECK(s.parameters.at("eta").swept());
    CHECK(s.grid.N == 32);
    CHECK(s.time.t_end == 1.0);
    REQUIRE(s.outputs.size() == 1);
    CHECK(s.outputs[0] == OutputKind::Spectrum);
    CHECK(expand_points(s).size() == 4);
}

TEST_CASE("grid scenario with presets and expressions") {
    const auto s = parse_scenario(R"yaml(
model: grid
parameters: {eta: 0.5}
grid:
  N: 16
  velocity: {x: "sin(y)", y: "0.5 * cos(x)"}
  modes: 3
  compression_sign: minus
  initial: beltrami
time: {t_end: 0.5, dt: 0.1}
outputs: [evolve]
seed: 9
)yaml");
    CHECK(s.model == Model::Grid);
    CHECK(s.grid.velocity.preset == VelocitySpec::Preset::Expression);
    CHECK(s.grid.compression_sign == operators::CompressionSign::Minus);
    CHECK(s.seed == 9);
    const auto v = s.grid.velocity.sample(16);
    CHECK(v.at(0, 0, 4) == doctest::Approx(std::sin(v.grid().y(4))));
    CHECK(v.at(1, 3, 0) == doctest::Approx(0.5 * std::cos(v.grid().x(3))));

    VelocitySpec shear;
    shear.preset = VelocitySpec::Preset::Shear;
    shear.amplitude = 2.0;
    const auto sv = shear.sample(8);
    CHECK(sv.at(0, 0, 2) == doctest::Approx(2.0 * std::sin(sv.grid().y(2))));
    CHECK(sv.at(1, 5, 2) == 0.0);
    CHECK(shear.canonical() == "shear:2");
}

TEST_CASE("each malformed scenario names its field") {
    int checked = 0;
    for (const auto& entry : fs::directory_iterator(TEST_DATA_DIR)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("bad_", 0) != 0) continue;
        const std::string text = read_file(entry.path());
        const auto tag = text.find("# expect-field: ");
        REQUIRE(tag != std::string::npos);
        const auto start = tag + std::string("# expect-field: ").size();
        const std::string field = text.substr(start, text.find('\n', start) - start);
        CAPTURE(name);
        try {
            parse_scenario(text);
            FAIL("accepted a malformed scenario");
        } catch (const ScenarioError& e) {
            CHECK(e.field() == field);
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
        ++checked;
    }
    CHECK(checked >= 5);
}

TEST_CASE("more validation") {
    CHECK_THROWS_AS(parse_scenario("model: [reduced"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario("- a\n- b\n"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario("model: reduced\nparameters: {R: 1, theta: 1}\noutputs: []\n"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario("model: reduced\nparameters: {R: 1, theta: 1, eta: -1}\noutputs: [spectrum]\n"),
                    ScenarioError);
    CHECK_THROWS_AS(parse_scenario("model: reduced\nparameters: {rho: -1}\noutputs: [classify]\n"), ScenarioError);
    CHECK_THROWS_AS(parse_scenario("model: reduced\nparameters: {R: 1, theta: 1}\noutputs: [spectrum]\nextra: 1\n"),
                    ScenarioError);
    CHECK_THROWS_AS(parse_scenario("model: reduced\nparameters: {R: 1, theta: 1}\noutputs: [spectrum, spectrum]\n"),
                    ScenarioError);
    CHECK_THROWS_AS(parse_scenario("model: reduced\nparameters: {R: {min: 0, max: 1, count: 3, scale: cubic}, theta: "
                                   "1}\noutputs: [sweep]\n"),
                    ScenarioError);
    try {
        parse_scenario("model: reduced\nparameters:\n  R: 1\n  theta: {min: 2, max: 2, count: 3}\noutputs: [sweep]\n");
        FAIL("accepted an empty sweep");
    } catch (const ScenarioError& e) {
        CHECK(e.field() == "parameters.theta.min");
        CHECK(e.line() == 4);
    }
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.yaml"), IoError);
}

TEST_CASE("sweep expansion order") {
    const auto s = parse_scenario(R"(
model: reduced
parameters:
  R: {min: 0, max: 1, count: 2}
  theta: 3
  eta: {min: 0, max: 2, count: 3}
outputs: [sweep]
)");
    const auto pts = expand_points(s);
    REQUIRE(pts.size() == 6);
    CHECK(pts[0].get("R") == 0.0);
    CHECK(pts[0].get("eta") == 0.0);
    CHECK(pts[1].get("eta") == 1.0);
    CHECK(pts[3].get("R") == 1.0);
    CHECK(pts[3].get("eta") == 0.0);
    CHECK(pts[5].index == 5);
    CHECK(pts[4].get("theta") == 3.0);
    CHECK_FALSE(pts[0].find("rho"));
}

TEST_CASE("scenario digest depends on content only") {
    const auto a = parse_scenario(kMinimal);
    const auto b = parse_scenario(std::string("# a comment\n") + kMinimal);
    CHECK(a.digest() == b.digest());
    CHECK(a.digest().size() == 64);
    const auto c = parse_scenario(R"(
outputs: [spectrum]
parameters:
  eta: {min: 1.0e-4, max: 0.1, count: 4, scale: log}
  theta: 1.0
  R: -1.0
model: reduced
)");
    CHECK(a.digest() == c.digest());
    const auto d = parse_scenario(R"(
model: reduced
parameters:
  R: -1
  theta: 1.0000001
  eta: {min: 1.0e-4, max: 1.0e-1, count: 4, scale: log}
outputs: [spectrum]
)");
    CHECK(a.digest() != d.digest());
}

TEST_CASE("result table invariants") {
    ResultTable t({"a", "b"});
    CHECK_THROWS_AS(t.add_row({1.0}), SchemaMismatch);
    CHECK_THROWS_AS(t.add_row({std::numeric_limits<double>::quiet_NaN(), 1.0}), InvalidArgument);
    CHECK_THROWS_AS(t.add_row({std::numeric_limits<double>::infinity(), 1.0}), InvalidArgument);
    t.add_row({1.0, std::string("x")});
    CHECK(t.rows().size() == 1);
    CHECK(std::get<std::string>(t.at(0, "b")) == "x");
    CHECK_THROWS_AS(t.at(0, "c"), SchemaMismatch);
}

TEST_CASE("CSV and JSON mirror round-trip losslessly") {
    TableMetadata meta{"ricci_dynamo", "1.2.3", "abc123", "2020-01-01T00:00:00Z"};
    ResultTable t({"real", "int", "flag", "text", "empty"}, meta);
    const std::vector<double> reals{0.1, 1.0 / 3.0, 2.0, -0.0, 1e-300, 6.02214076e23, -1.7976931348623157e308,
                                    4.9406564584124654e-324, 0.30000000000000004};
    std::int64_t i = -3;
    for (double r : reals) {
        t.add_row({r, i++, i % 2 == 0, std::string("a,\"b\""), std::monostate{}});
    }
    t.add_row({1.5, std::int64_t{7}, true, std::string("true"), std::monostate{}});
    t.add_row({2.5, std::int64_t{8}, false, std::string("12"), std::string("")});

    std::stringstream csv, json;
    write_csv(csv, t);
    write_json(json, t);
    const auto from_csv = read_csv(csv);
    const auto from_json = read_json(json);
    CHECK(from_csv == t);
    CHECK(from_json == t);
    CHECK(from_csv == from_json);
    for (std::size_t r = 0; r < reals.size(); ++r) {
        const double back = std::get<double>(from_csv.rows()[r][0]);
        CHECK(std::memcmp(&back, &reals[r], sizeof back) == 0);
    }
}

TEST_CASE("CSV dialect") {
    ResultTable t({"x", "label"}, {"tool", "v", "d", "ts"});
    t.add_row({2.0, std::string("plain")});
    std::stringstream out;
    write_csv(out, t);
    const std::string text = out.str();
    CHECK(text.rfind("# tool: tool\n# version: v\n# digest: d\n# timestamp: ts\nx,label\n", 0) == 0);
    CHECK(text.find("2.0,plain\n") != std::string::npos);
    CHECK(format_cell(0.5) == "0.5");
    CHECK(format_cell(1e21) == "1e+21");
    CHECK(format_cell(std::int64_t{3}) == "3");
    CHECK(format_cell(true) == "true");
    CHECK(format_cell(std::string("x,y")) == "\"x,y\"");
}

TEST_CASE("plot data projections") {
    ResultTable t({"point", "t", "energy", "log_energy"}, {"tool", "v", "digest42", "ts"});
    t.add_row({std::int64_t{0}, 0.0, 1.0, 0.0});
    t.add_row({std::int64_t{0}, 0.5, 2.0, std::log(2.0)});
    t.add_row({std::int64_t{1}, 0.0, 1.0, 0.0});
    std::stringstream out;
    emit_plotdata(out, t, PlotKind::GrowthCurve);
    const std::string text = out.str();
    CHECK(text.find("# columns: t log_energy") != std::string::npos);
    CHECK(text.find("# digest: digest42") != std::string::npos);
    CHECK(text.find("0.5 0.69314718055994529\n\n\n0 0\n") != std::string::npos);

    try {
        emit_plotdata(out, t, PlotKind::RegimeMap);
        FAIL("missing columns accepted");
    } catch (const SchemaMismatch& e) {
        const std::string msg = e.what();
        CHECK(msg.find("rho") != std::string::npos);
        CHECK(msg.find("regime_code") != std::string::npos);
    }
}

TEST_CASE("spectrum output for the minimal scenario") {
    const auto s = parse_scenario(kMinimal);
    const auto tables = compute_outputs(s, 1, {});
    const auto& t = tables.at(OutputKind::Spectrum);
    int roots = 0;
    int verdicts = 0;
    for (std::size_t r = 0; r < t.rows().size(); ++r) {
        const auto kind = std::get<std::string>(t.at(r, "row_kind"));
        if (kind == "root") ++roots;
        if (kind == "fast_dynamo") {
            ++verdicts;
            CHECK(std::get<bool>(t.at(r, "verdict")));
            CHECK(std::get<double>(t.at(r, "limit")) == doctest::Approx(0.5).epsilon(1e-6));
        }
    }
    CHECK(roots == 8);
    CHECK(verdicts == 1);
}

TEST_CASE("classify output for a static universe") {
    const auto s = parse_scenario("model: reduced\nparameters: {rho: 1, theta: 0}\noutputs: [classify]\n");
    const auto tables = compute_outputs(s, 1, {});
    const auto& t = tables.at(OutputKind::Classify);
    REQUIRE(t.rows().size() == 1);
    CHECK(std::get<std::string>(t.at(0, "regime")) == "MarginalEinsteinStatic");
    CHECK(std::get<std::int64_t>(t.at(0, "regime_code")) == 2);
}

TEST_CASE("ricci flow and discrepancy outputs") {
    const auto s = parse_scenario(R"(
model: reduced
parameters: {R: 0, theta: 1, eta: 0, Lambda: 0.5}
time: {t_end: 1, dt: 0.1}
outputs: [ricci_flow, discrepancy]
)");
    const auto tables = compute_outputs(s, 1, {});
    const auto& flow = tables.at(OutputKind::RicciFlow);
    REQUIRE(flow.rows().size() == 12);
    CHECK(std::get<std::string>(flow.at(11, "row_kind")) == "lyapunov");
    CHECK(std::get<double>(flow.at(10, "g11")) == doctest::Approx(std::pow(0.9, 10)));
    const auto& disc = tables.at(OutputKind::Discrepancy);
    bool saw_disagreement = false;
    for (std::size_t r = 0; r < disc.rows().size(); ++r) {
        if (std::get<std::string>(disc.at(r, "row_kind")) != "pair") continue;
        const auto a = std::get<std::string>(disc.at(r, "source"));
        const auto b = std::get<std::string>(disc.at(r, "source_b"));
        const bool agrees = std::get<bool>(disc.at(r, "agrees"));
        if (a == "Quadratic36" && b == "PaperEq3") saw_disagreement = !agrees;
        if (a == "Quadratic36" && b == "NumericalReduced") CHECK(agrees);
    }
    CHECK(saw_disagreement);
}

TEST_CASE("grid evolve output") {
    const auto s = parse_scenario(R"(
model: grid
parameters: {eta: 1}
grid: {N: 16, velocity: zero}
time: {t_end: 1, dt: 0.25}
outputs: [evolve]
)");
    const auto tables = compute_outputs(s, 1, {});
    const auto& t = tables.at(OutputKind::Evolve);
    REQUIRE(t.rows().size() == 5);
    CHECK(std::get<std::string>(t.at(0, "trend")) == "decaying");
    CHECK(std::get<double>(t.at(0, "fitted_rate")) == doctest::Approx(-2.0).epsilon(0.01));
}

TEST_CASE("output is independent of the worker count") {
    const auto s = load_scenario(REFERENCE_SCENARIO);
    const TableMetadata meta{"ricci_dynamo", "x", s.digest(), "fixed"};
    const auto one = compute_outputs(s, 1, meta);
    const auto three = compute_outputs(s, 3, meta);
    CHECK(one == three);
}

TEST_CASE("run_scenario writes files and maps failures to exit codes") {
    const auto dir = scratch("run");
    std::stringstream log, err;
    RunOptions opts;
    opts.out = dir / "out";
    opts.timestamp = "fixed";
    CHECK(run_scenario(REFERENCE_SCENARIO, opts, log, err) == kExitOk);
    for (const char* f : {"spectrum.csv", "spectrum.json", "spectrum.dat", "evolve.dat", "sweep.csv",
                          "discrepancy.json", "ricci_flow.csv"}) {
        CAPTURE(f);
        CHECK(fs::exists(opts.out / f));
    }
    const std::string first = read_file(opts.out / "spectrum.csv");
    CHECK(run_scenario(REFERENCE_SCENARIO, opts, log, err) == kExitOk);
    CHECK(read_file(opts.out / "spectrum.csv") == first);

    opts.format = OutputFormat::Csv;
    opts.out = dir / "csv_only";
    CHECK(run_scenario(REFERENCE_SCENARIO, opts, log, err) == kExitOk);
    CHECK(fs::exists(opts.out / "sweep.csv"));
    CHECK_FALSE(fs::exists(opts.out / "sweep.json"));

    std::stringstream e2;
    CHECK(run_scenario(std::string(TEST_DATA_DIR) + "/bad_sweep_order.yaml", opts, log, e2) == kExitParse);
    CHECK(e2.str().find("parameters.eta.min") != std::string::npos);

    std::stringstream e3;
    CHECK(run_scenario(std::string(TEST_DATA_DIR) + "/fails_numerically.yaml", opts, log, e3) == kExitNumerical);
    CHECK(e3.str().find("point 1") != std::string::npos);

    std::stringstream e4;
    CHECK(run_scenario(std::string(TEST_DATA_DIR) + "/missing.yaml", opts, log, e4) == kExitIo);
    std::ofstream(dir / "blocker") << "x";
    opts.out = dir / "blocker" / "sub";
    CHECK(run_scenario(REFERENCE_SCENARIO, opts, log, e4) == kExitIo);
}

TEST_CASE("thread count resolution") {
    unsetenv("RICCI_DYNAMO_THREADS");
    CHECK(resolve_threads(3) == 3);
    CHECK_THROWS_AS(resolve_threads(0), InvalidArgument);
    setenv("RICCI_DYNAMO_THREADS", "2", 1);
    CHECK(resolve_threads(5) == 2);
    setenv("RICCI_DYNAMO_THREADS", "two", 1);
    CHECK_THROWS_AS(resolve_threads(1), InvalidArgument);
    unsetenv("RICCI_DYNAMO_THREADS");
}

TEST_CASE("validate_scenario") {
    std::stringstream log, err;
    CHECK(validate_scenario(REFERENCE_SCENARIO, log, err) == kExitOk);
    CHECK(log.str().find("ok:") == 0);
    CHECK(validate_scenario(std::string(TEST_DATA_DIR) + "/bad_model.yaml", log, err) == kExitParse);
    CHECK(err.str().find("model") != std::string::npos);
}
