#include "ricci_dynamo/cli/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "ricci_dynamo/cosmology.hpp"
#include "ricci_dynamo/dynamics.hpp"
#include "ricci_dynamo/spectrum.hpp"

#ifndef RICCI_DYNAMO_VERSION
#define RICCI_DYNAMO_VERSION "0.0.0"
#endif

namespace ricci_dynamo::cli {

namespace {

using spectrum::Source;
using spectrum::SpectrumResult;

std::int64_t source_code(Source s) { return static_cast<std::int64_t>(s); }

std::string describe_point(const SweepPoint& p) {
    std::ostringstream out;
    out << "point " << p.index;
    const char* sep = " (";
    for (const auto& name : kParameterNames) {
        if (auto v = p.find(name)) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", *v);
            out << sep << name << '=' << buf;
            sep = ", ";
        }
    }
    if (std::string(sep) == ", ") out << ')';
    return out.str();
}

// Columns shared by the per-point tables: one per parameter present in the scenario.
std::vector<std::string> parameter_columns(const Scenario& s) {
    std::vector<std::string> cols;
    for (const auto& name : kParameterNames) {
        if (s.has(name)) cols.push_back(name);
    }
    return cols;
}

Row parameter_cells(const Scenario& s, const SweepPoint& p) {
    Row row;
    for (const auto& name : parameter_columns(s)) row.emplace_back(p.get(name));
    return row;
}

double value_or(const SweepPoint& p, const std::string& name, double fallback) {
    return p.find(name).value_or(fallback);
}

grid::GridField initial_field(const Scenario& s) {
    const int n = s.grid.N;
    if (s.grid.initial == "beltrami") {
        return grid::GridField::from_functions(n, [](double, double y) { return std::sin(y); },
                                               [](double x, double) { return std::sin(x); });
    }
    if (s.grid.initial == "random") {
        std::mt19937_64 rng(s.seed);
        std::normal_distribution<double> normal;
        Eigen::VectorXd data(2 * n * n);
        for (Eigen::Index i = 0; i < data.size(); ++i) data[i] = normal(rng);
        return grid::GridField(n, data);
    }
    return grid::GridField::from_functions(n, [](double x, double) { return std::sin(x); },
                                           [](double, double) { return 0.0; });
}

operators::GridOperator grid_operator(const Scenario& s, const SweepPoint& p) {
    return operators::assemble_grid(s.grid.velocity.sample(s.grid.N), geometry::Metric2::identity(),
                                    geometry::Connection::flat(), value_or(p, "eta", 0.0), s.grid.N,
                                    s.grid.compression_sign);
}

SpectrumResult point_spectrum(const Scenario& s, const SweepPoint& p) {
    if (s.model == Model::Reduced) return spectrum::quadratic_roots(p.get("R"), p.get("theta"), value_or(p, "eta", 0.0));
    spectrum::GridEigenOptions opts;
    opts.seed = s.seed;
    return spectrum::numerical_spectrum(grid_operator(s, p), s.grid.modes, opts);
}

// ---- per-kind schemas -------------------------------------------------------

std::vector<std::string> with_params(const Scenario& s, std::vector<std::string> head, std::vector<std::string> tail) {
    auto params = parameter_columns(s);
    head.insert(head.end(), params.begin(), params.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
}

std::vector<std::string> columns_for(const Scenario& s, OutputKind kind) {
    switch (kind) {
        case OutputKind::Spectrum:
            return with_params(s, {"row_kind", "point"},
                               {"source", "source_code", "root", "re", "im", "residual", "verdict", "limit"});
        case OutputKind::Sweep:
            return with_params(s, {"point"}, {"source", "max_re", "max_im", "growing"});
        case OutputKind::Evolve:
            return with_params(s, {"point"}, {"t", "norm", "energy", "log_energy", "fitted_rate", "trend"});
        case OutputKind::Classify:
            return {"point", "rho", "theta", "R", "regime", "regime_code", "real_part", "discriminant",
                    "expansion_bound", "zero_growth"};
        case OutputKind::RicciFlow:
            return {"row_kind", "point", "Lambda", "step", "t", "g11", "g12", "g22", "exact_g11", "abs_error",
                    "ricci_rate", "exponent"};
        case OutputKind::Discrepancy:
            return {"row_kind", "point", "R", "theta", "eta", "source", "root", "re", "im", "source_b",
                    "max_difference", "agrees"};
    }
    return {};
}

const Cell kEmpty = std::monostate{};

// ---- per-point evaluation ---------------------------------------------------

struct PointResult {
    std::map<OutputKind, std::vector<Row>> rows;
    std::optional<SpectrumResult> spectrum;
    std::optional<std::string> failure;
};

void spectrum_rows(const Scenario& s, const SweepPoint& p, const SpectrumResult& spec, std::vector<Row>& out) {
    const auto values = spec.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        Row row{std::string("root"), static_cast<std::int64_t>(p.index)};
        for (auto& c : parameter_cells(s, p)) row.push_back(c);
        // residuals are stored per distinct root; map expanded roots back to them
        Cell residual = kEmpty;
        if (!spec.residuals.empty()) {
            std::size_t k = 0;
            for (std::size_t seen = 0; k < spec.roots.size(); ++k) {
                seen += static_cast<std::size_t>(spec.roots[k].multiplicity);
                if (i < seen) break;
            }
            residual = spec.residuals.at(k);
        }
        row.insert(row.end(), {std::string(spectrum::to_string(spec.source)), source_code(spec.source),
                               static_cast<std::int64_t>(i), values[i].real(), values[i].imag(), residual, kEmpty,
                               kEmpty});
        out.push_back(std::move(row));
    }
}

void sweep_rows(const Scenario& s, const SweepPoint& p, const SpectrumResult& spec, std::vector<Row>& out) {
    const auto values = spec.values();
    const auto lead = std::max_element(values.begin(), values.end(),
                                       [](auto a, auto b) { return a.real() < b.real(); });
    Row row{static_cast<std::int64_t>(p.index)};
    for (auto& c : parameter_cells(s, p)) row.push_back(c);
    row.insert(row.end(), {std::string(spectrum::to_string(spec.source)), lead->real(), std::abs(lead->imag()),
                           lead->real() > spectrum::kFastDynamoTolerance});
    out.push_back(std::move(row));
}

std::string trend_name(dynamics::EnergyTrend t) {
    switch (t) {
        case dynamics::EnergyTrend::Growing: return "growing";
        case dynamics::EnergyTrend::Marginal: return "marginal";
        case dynamics::EnergyTrend::Decaying: return "decaying";
    }
    return "";
}

template <typename Traj>
void append_evolution(const Scenario& s, const SweepPoint& p, const Traj& traj, std::vector<Row>& out) {
    const auto history = dynamics::energy_rate(traj, [](double) { return geometry::Metric2::identity(); });
    for (std::size_t i = 0; i < history.times.size(); ++i) {
        if (!(history.energy[i] > 0.0)) throw InvalidArgument("magnetic energy vanished at t = " + std::to_string(history.times[i]));
        Row row{static_cast<std::int64_t>(p.index)};
        for (auto& c : parameter_cells(s, p)) row.push_back(c);
        row.insert(row.end(), {history.times[i], traj.norms[i], history.energy[i], std::log(history.energy[i]),
                               history.fitted_rate, trend_name(history.trend)});
        out.push_back(std::move(row));
    }
}

void evolve_rows(const Scenario& s, const SweepPoint& p, std::vector<Row>& out) {
    if (s.model == Model::Reduced) {
        const auto op = operators::assemble_reduced(p.get("R"), p.get("theta"), value_or(p, "eta", 0.0));
        const geometry::Vec2 b0 = geometry::Vec2(1.0, 1.0).normalized();
        append_evolution(s, p, dynamics::integrate(op, b0, s.time.t_end, s.time.dt), out);
    } else {
        append_evolution(s, p, dynamics::integrate(grid_operator(s, p), initial_field(s), s.time.t_end, s.time.dt),
                         out);
    }
}

void classify_rows(const Scenario& s, const SweepPoint& p, std::vector<Row>& out) {
    const double rho = p.get("rho");
    const double theta = value_or(p, "theta", 0.0);
    cosmology::CosmologicalState state = cosmology::curvature_from_matter(rho, theta);
    if (auto lambda = p.find("Lambda")) {
        state.Lambda = *lambda;
        state = state.with_einstein_condition();
    }
    if (auto r = p.find("R")) state.R = *r;
    const auto regime = cosmology::classify(state);
    out.push_back({static_cast<std::int64_t>(p.index), rho, theta, state.R, std::string(cosmology::to_string(regime.label)),
                   static_cast<std::int64_t>(cosmology::regime_code(regime.label)), regime.real_part,
                   regime.discriminant, regime.expansion_bound_holds, regime.zero_growth});
    (void)s;
}

void ricci_flow_rows(const Scenario& s, const SweepPoint& p, std::vector<Row>& out) {
    const double lambda = p.find("Lambda").value_or(value_or(p, "R", 0.0));
    const int steps = std::max(1, static_cast<int>(std::lround(s.time.t_end / s.time.dt)));
    const auto history = geometry::evolve_einstein_flow(geometry::Metric2::identity(), lambda, s.time.t_end, steps);
    const auto idx = static_cast<std::int64_t>(p.index);
    for (std::size_t k = 0; k < history.size(); ++k) {
        const auto& g = history[k];
        const double exact = geometry::exact_flow_metric(lambda, g.time())(0, 0);
        out.push_back({std::string("step"), idx, lambda, static_cast<std::int64_t>(k), g.time(), g(0, 0), g(0, 1),
                       g(1, 1), exact, std::abs(g(0, 0) - exact), kEmpty, kEmpty});
    }
    const auto lyap = geometry::lyapunov_from_metric(history);
    out.push_back({std::string("lyapunov"), idx, lambda, kEmpty, lyap.window, kEmpty, kEmpty, kEmpty, kEmpty, kEmpty,
                   lyap.ricci_rates.back(), lyap.exponents.back()});
}

void discrepancy_rows(const SweepPoint& p, std::vector<Row>& out) {
    const double R = p.get("R");
    const double theta = p.get("theta");
    const double eta = value_or(p, "eta", 0.0);
    const auto report = spectrum::discrepancy_report(R, theta, eta);
    const auto idx = static_cast<std::int64_t>(p.index);
    for (const auto& spec : report.spectra) {
        const auto values = spec.values();
        for (std::size_t i = 0; i < values.size(); ++i) {
            out.push_back({std::string("root"), idx, R, theta, eta, std::string(spectrum::to_string(spec.source)),
                           static_cast<std::int64_t>(i), values[i].real(), values[i].imag(), kEmpty, kEmpty, kEmpty});
        }
    }
    for (const auto& pair : report.pairs) {
        double worst = 0.0;
        for (const auto& d : pair.differences) worst = std::max(worst, std::abs(d));
        out.push_back({std::string("pair"), idx, R, theta, eta, std::string(spectrum::to_string(pair.a)), kEmpty,
                       kEmpty, kEmpty, std::string(spectrum::to_string(pair.b)), worst, pair.agrees});
    }
}

PointResult evaluate_point(const Scenario& s, const SweepPoint& p) {
    PointResult result;
    try {
        const bool needs_spectrum = std::any_of(s.outputs.begin(), s.outputs.end(), [](OutputKind k) {
            return k == OutputKind::Spectrum || k == OutputKind::Sweep;
        });
        if (needs_spectrum) result.spectrum = point_spectrum(s, p);
        for (OutputKind kind : s.outputs) {
            auto& rows = result.rows[kind];
            switch (kind) {
                case OutputKind::Spectrum: spectrum_rows(s, p, *result.spectrum, rows); break;
                case OutputKind::Sweep: sweep_rows(s, p, *result.spectrum, rows); break;
                case OutputKind::Evolve: evolve_rows(s, p, rows); break;
                case OutputKind::Classify: classify_rows(s, p, rows); break;
                case OutputKind::RicciFlow: ricci_flow_rows(s, p, rows); break;
                case OutputKind::Discrepancy: discrepancy_rows(p, rows); break;
            }
        }
    } catch (const std::exception& e) {
        result.failure = "numerical failure at " + describe_point(p) + ": " + e.what();
    }
    return result;
}

// Fast-dynamo verdicts: one per combination of the non-eta parameters, over the
// positive eta values of that group in decreasing order.
void verdict_rows(const Scenario& s, const std::vector<SweepPoint>& points, const std::vector<PointResult>& results,
                  std::vector<Row>& out) {
    if (!s.has("eta") || !s.parameters.at("eta").swept()) return;
    std::vector<std::map<std::string, double>> order;
    std::map<std::map<std::string, double>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto key = points[i].values;
        key.erase("eta");
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(i);
    }
    for (const auto& key : order) {
        std::vector<std::size_t> members;
        for (std::size_t i : groups[key]) {
            if (points[i].get("eta") > 0.0) members.push_back(i);
        }
        if (members.size() < 3) continue;
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return points[a].get("eta") > points[b].get("eta"); });
        std::vector<double> etas;
        std::map<double, const SpectrumResult*> by_eta;
        for (std::size_t i : members) {
            etas.push_back(points[i].get("eta"));
            by_eta[etas.back()] = &*results[i].spectrum;
        }
        spectrum::FastDynamoVerdict verdict;
        try {
            verdict = spectrum::fast_dynamo_test([&](double eta) { return *by_eta.at(eta); }, etas);
        } catch (const Error& e) {
            std::string where = "fast-dynamo test for";
            for (const auto& [name, v] : key) where += " " + name + "=" + std::to_string(v);
            throw PointFailure("numerical failure in " + where + ": " + e.what());
        }
        Row row{std::string("fast_dynamo"), kEmpty};
        for (const auto& name : parameter_columns(s)) {
            if (name == "eta") row.push_back(kEmpty);
            else row.emplace_back(key.at(name));
        }
        const Source src = results[members.front()].spectrum->source;
        row.insert(row.end(), {std::string(spectrum::to_string(src)), source_code(src), kEmpty, kEmpty, kEmpty, kEmpty,
                               verdict.fast, verdict.limit});
        out.push_back(std::move(row));
    }
}

std::optional<PlotKind> plot_for(OutputKind kind) {
    switch (kind) {
        case OutputKind::Evolve: return PlotKind::GrowthCurve;
        case OutputKind::Spectrum: return PlotKind::SpectrumScatter;
        case OutputKind::Classify: return PlotKind::RegimeMap;
        default: return std::nullopt;
    }
}

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    writer(out);
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

} // namespace

std::string tool_version() { return RICCI_DYNAMO_VERSION; }

std::map<OutputKind, ResultTable> compute_outputs(const Scenario& scenario, int threads, const TableMetadata& metadata) {
    const auto points = expand_points(scenario);
    std::vector<PointResult> results(points.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) results[i] = evaluate_point(scenario, points[i]);
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(points.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    for (const auto& r : results) {
        if (r.failure) throw PointFailure(*r.failure);
    }

    std::map<OutputKind, ResultTable> tables;
    for (OutputKind kind : scenario.outputs) {
        ResultTable table(columns_for(scenario, kind), metadata);
        for (const auto& r : results) {
            for (const auto& row : r.rows.at(kind)) table.add_row(row);
        }
        if (kind == OutputKind::Spectrum) {
            std::vector<Row> extra;
            verdict_rows(scenario, points, results, extra);
            for (auto& row : extra) table.add_row(std::move(row));
        }
        tables.emplace(kind, std::move(table));
    }
    return tables;
}

void write_outputs(const std::map<OutputKind, ResultTable>& tables, const RunOptions& options) {
    std::error_code ec;
    std::filesystem::create_directories(options.out, ec);
    if (ec) throw IoError("cannot create output directory '" + options.out.string() + "': " + ec.message());
    for (const auto& [kind, table] : tables) {
        const auto base = options.out / to_string(kind);
        if (options.format != OutputFormat::Json) {
            write_file(base.string() + ".csv", [&](std::ostream& o) { write_csv(o, table); });
        }
        if (options.format != OutputFormat::Csv) {
            write_file(base.string() + ".json", [&](std::ostream& o) { write_json(o, table); });
        }
        if (auto plot = plot_for(kind)) {
            write_file(base.string() + ".dat", [&](std::ostream& o) { emit_plotdata(o, table, *plot); });
        }
    }
}

int resolve_threads(int requested) {
    const char* env = std::getenv("RICCI_DYNAMO_THREADS");
    if (!env) {
        if (requested < 1) throw InvalidArgument("thread count must be at least 1");
        return requested;
    }
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 1024) {
        throw InvalidArgument(std::string("RICCI_DYNAMO_THREADS must be a positive integer, got '") + env + "'");
    }
    return static_cast<int>(v);
}

namespace {

void report_scenario_error(const std::string& path, const ScenarioError& e, std::ostream& err) {
    err << "error: " << path << ": " << e.what() << '\n';
}

} // namespace

int run_scenario(const std::string& path, const RunOptions& options, std::ostream& log, std::ostream& err) {
    Scenario scenario;
    try {
        scenario = load_scenario(path);
    } catch (const ScenarioError& e) {
        report_scenario_error(path, e, err);
        return kExitParse;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }

    int threads = 1;
    try {
        threads = resolve_threads(options.threads);
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    TableMetadata meta{"ricci_dynamo", tool_version(), scenario.digest(), options.timestamp.value_or(utc_timestamp())};
    std::map<OutputKind, ResultTable> tables;
    try {
        tables = compute_outputs(scenario, threads, meta);
    } catch (const PointFailure& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }

    try {
        write_outputs(tables, options);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
    for (const auto& [kind, table] : tables) {
        log << to_string(kind) << ": " << table.rows().size() << " rows -> " << (options.out / to_string(kind)).string()
            << ".*\n";
    }
    return kExitOk;
}

int validate_scenario(const std::string& path, std::ostream& log, std::ostream& err) {
    try {
        const Scenario s = load_scenario(path);
        log << "ok: " << to_string(s.model) << " model, " << expand_points(s).size() << " point(s), digest "
            << s.digest() << '\n';
        return kExitOk;
    } catch (const ScenarioError& e) {
        report_scenario_error(path, e, err);
        return kExitParse;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
}

} // namespace ricci_dynamo::cli
