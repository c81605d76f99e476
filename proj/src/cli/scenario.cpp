#include "ricci_dynamo/cli/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

namespace ricci_dynamo::cli {

namespace {

std::string describe(const std::string& field, const std::string& message, int line) {
    std::string out = "field '" + field + "': " + message;
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    return out;
}

int line_of(const YAML::Node& node) {
    const auto mark = node.Mark();
    return mark.is_null() ? 0 : mark.line + 1;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double as_double(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) throw ScenarioError(field, "expected a number", line_of(node));
    try {
        const double v = node.as<double>();
        if (!std::isfinite(v)) throw ScenarioError(field, "value must be finite", line_of(node));
        return v;
    } catch (const YAML::BadConversion&) {
        throw ScenarioError(field, "expected a number, got '" + node.Scalar() + "'", line_of(node));
    }
}

long long as_integer(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) throw ScenarioError(field, "expected an integer", line_of(node));
    try {
        return node.as<long long>();
    } catch (const YAML::BadConversion&) {
        throw ScenarioError(field, "expected an integer, got '" + node.Scalar() + "'", line_of(node));
    }
}

std::string as_string(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) throw ScenarioError(field, "expected a string", line_of(node));
    return node.Scalar();
}

void reject_unknown_keys(const YAML::Node& map, const std::set<std::string>& known, const std::string& prefix) {
    for (const auto& kv : map) {
        const std::string key = kv.first.Scalar();
        if (!known.count(key)) {
            throw ScenarioError(prefix.empty() ? key : prefix + "." + key, "unknown key", line_of(kv.first));
        }
    }
}

Parameter parse_parameter(const YAML::Node& node, const std::string& field) {
    if (node.IsScalar()) return {as_double(node, field)};
    if (!node.IsMap()) throw ScenarioError(field, "expected a number or a sweep {min, max, count, scale}", line_of(node));
    reject_unknown_keys(node, {"min", "max", "count", "scale"}, field);
    for (const char* key : {"min", "max", "count"}) {
        if (!node[key]) throw ScenarioError(field + "." + key, "missing sweep entry", line_of(node));
    }
    SweepRange r;
    r.min = as_double(node["min"], field + ".min");
    r.max = as_double(node["max"], field + ".max");
    const long long count = as_integer(node["count"], field + ".count");
    if (count < 2 || count > 1'000'000) {
        throw ScenarioError(field + ".count", "sweep count must be at least 2", line_of(node["count"]));
    }
    r.count = static_cast<int>(count);
    if (node["scale"]) {
        const std::string scale = as_string(node["scale"], field + ".scale");
        if (scale == "linear") r.scale = SweepRange::Scale::Linear;
        else if (scale == "log") r.scale = SweepRange::Scale::Log;
        else throw ScenarioError(field + ".scale", "scale must be 'linear' or 'log', got '" + scale + "'",
                                 line_of(node["scale"]));
    }
    if (!(r.min < r.max)) {
        throw ScenarioError(field + ".min", "sweep min must be less than max (min = " + fmt(r.min) + ", max = " +
                                                fmt(r.max) + ")",
                            line_of(node["min"]));
    }
    if (r.scale == SweepRange::Scale::Log && !(r.min > 0.0)) {
        throw ScenarioError(field + ".min", "log-scale sweep requires min > 0", line_of(node["min"]));
    }
    return {r};
}

VelocitySpec parse_velocity(const YAML::Node& node) {
    const std::string field = "grid.velocity";
    VelocitySpec v;
    if (node.IsMap()) {
        reject_unknown_keys(node, {"x", "y"}, field);
        v.preset = VelocitySpec::Preset::Expression;
        v.vx = node["x"] ? as_string(node["x"], field + ".x") : "0";
        v.vy = node["y"] ? as_string(node["y"], field + ".y") : "0";
        for (const auto& [name, text] : {std::pair{"x", v.vx}, std::pair{"y", v.vy}}) {
            try {
                Expression::parse(text);
            } catch (const ExpressionError& e) {
                throw ScenarioError(field + "." + name, e.what(), line_of(node));
            }
        }
        return v;
    }
    const std::string text = as_string(node, field);
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    if (name == "zero" && colon == std::string::npos) return v;
    if ((name == "shear" || name == "rotation") && colon != std::string::npos) {
        v.preset = name == "shear" ? VelocitySpec::Preset::Shear : VelocitySpec::Preset::Rotation;
        try {
            std::size_t used = 0;
            const std::string number = text.substr(colon + 1);
            v.amplitude = std::stod(number, &used);
            if (used != number.size() || !std::isfinite(v.amplitude)) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ScenarioError(field, "malformed amplitude in '" + text + "'", line_of(node));
        }
        return v;
    }
    throw ScenarioError(field, "expected zero, shear:<a>, rotation:<w> or {x: expr, y: expr}, got '" + text + "'",
                        line_of(node));
}

void require(const Scenario& s, const std::string& name, OutputKind kind) {
    if (!s.has(name)) {
        throw ScenarioError("parameters." + name, "required by output '" + to_string(kind) + "'");
    }
}

void validate(const Scenario& s) {
    if (s.outputs.empty()) throw ScenarioError("outputs", "at least one output is required");
    if (s.has("eta")) {
        for (double e : s.parameters.at("eta").values()) {
            if (e < 0.0) throw ScenarioError("parameters.eta", "resistivity must be non-negative");
        }
    }
    if (s.has("rho")) {
        for (double r : s.parameters.at("rho").values()) {
            if (r < 0.0) throw ScenarioError("parameters.rho", "matter density must be non-negative");
        }
    }
    for (OutputKind k : s.outputs) {
        switch (k) {
            case OutputKind::Spectrum:
            case OutputKind::Sweep:
            case OutputKind::Evolve:
                if (s.model == Model::Reduced) {
                    require(s, "R", k);
                    require(s, "theta", k);
                }
                break;
            case OutputKind::Discrepancy:
                require(s, "R", k);
                require(s, "theta", k);
                break;
            case OutputKind::Classify: require(s, "rho", k); break;
            case OutputKind::RicciFlow:
                if (!s.has("Lambda") && !s.has("R")) {
                    throw ScenarioError("parameters.Lambda", "output 'ricci_flow' needs Lambda or R");
                }
                break;
        }
    }
}

} // namespace

ScenarioError::ScenarioError(std::string field, const std::string& message, int line)
    : Error(describe(field, message, line)), field_(std::move(field)), line_(line) {}

std::string to_string(Model m) { return m == Model::Reduced ? "reduced" : "grid"; }

std::string to_string(OutputKind k) {
    switch (k) {
        case OutputKind::Spectrum: return "spectrum";
        case OutputKind::Sweep: return "sweep";
        case OutputKind::Evolve: return "evolve";
        case OutputKind::Classify: return "classify";
        case OutputKind::RicciFlow: return "ricci_flow";
        case OutputKind::Discrepancy: return "discrepancy";
    }
    return "unknown";
}

std::vector<double> SweepRange::values() const {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) {
        const double f = static_cast<double>(i) / (count - 1);
        if (scale == Scale::Linear) {
            out.push_back(min + f * (max - min));
        } else {
            out.push_back(std::exp(std::log(min) + f * (std::log(max) - std::log(min))));
        }
    }
    out.front() = min;
    out.back() = max;
    return out;
}

std::vector<double> Parameter::values() const {
    if (const auto* v = std::get_if<double>(&value)) return {*v};
    return std::get<SweepRange>(value).values();
}

grid::GridField VelocitySpec::sample(int n) const {
    using grid::GridField;
    switch (preset) {
        case Preset::Zero: return GridField(n);
        case Preset::Shear: {
            const double a = amplitude;
            return GridField::from_functions(n, [a](double, double y) { return a * std::sin(y); },
                                             [](double, double) { return 0.0; });
        }
        case Preset::Rotation: {
            // Periodic cellular vortex with angular velocity w at the cell centres.
            const double w = amplitude;
            return GridField::from_functions(n, [w](double x, double y) { return w * std::sin(x) * std::cos(y); },
                                             [w](double x, double y) { return -w * std::cos(x) * std::sin(y); });
        }
        case Preset::Expression: {
            const Expression ex = Expression::parse(vx);
            const Expression ey = Expression::parse(vy);
            return GridField::from_functions(n, [&ex](double x, double y) { return ex(x, y); },
                                             [&ey](double x, double y) { return ey(x, y); });
        }
    }
    return GridField(n);
}

std::string VelocitySpec::canonical() const {
    switch (preset) {
        case Preset::Zero: return "zero";
        case Preset::Shear: return "shear:" + fmt(amplitude);
        case Preset::Rotation: return "rotation:" + fmt(amplitude);
        case Preset::Expression: return "expr:" + vx + ";" + vy;
    }
    return "";
}

std::string Scenario::canonical() const {
    std::ostringstream out;
    out << "model=" << to_string(model) << '\n';
    out << "seed=" << seed << '\n';
    for (const auto& name : kParameterNames) {
        auto it = parameters.find(name);
        if (it == parameters.end()) continue;
        out << "parameters." << name << '=';
        if (const auto* v = std::get_if<double>(&it->second.value)) {
            out << fmt(*v);
        } else {
            const auto& r = std::get<SweepRange>(it->second.value);
            out << "sweep(" << fmt(r.min) << ',' << fmt(r.max) << ',' << r.count << ','
                << (r.scale == SweepRange::Scale::Log ? "log" : "linear") << ')';
        }
        out << '\n';
    }
    out << "grid.N=" << grid.N << '\n'
        << "grid.velocity=" << grid.velocity.canonical() << '\n'
        << "grid.modes=" << grid.modes << '\n'
        << "grid.compression_sign=" << (grid.compression_sign == operators::CompressionSign::Plus ? "plus" : "minus")
        << '\n'
        << "grid.initial=" << grid.initial << '\n';
    out << "time.t_end=" << fmt(time.t_end) << '\n' << "time.dt=" << fmt(time.dt) << '\n';
    out << "outputs=";
    for (std::size_t i = 0; i < outputs.size(); ++i) out << (i ? "," : "") << to_string(outputs[i]);
    out << '\n';
    return out.str();
}

std::string Scenario::digest() const {
    const std::string text = canonical();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

Scenario parse_scenario(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ScenarioError("<syntax>", e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
    }
    if (!root.IsMap()) throw ScenarioError("<document>", "scenario must be a mapping of sections");
    reject_unknown_keys(root, {"model", "parameters", "grid", "time", "outputs", "seed"}, "");

    Scenario s;
    if (!root["model"]) throw ScenarioError("model", "missing; expected 'reduced' or 'grid'");
    const std::string model = as_string(root["model"], "model");
    if (model == "reduced") s.model = Model::Reduced;
    else if (model == "grid") s.model = Model::Grid;
    else throw ScenarioError("model", "expected 'reduced' or 'grid', got '" + model + "'", line_of(root["model"]));

    if (root["seed"]) {
        const long long seed = as_integer(root["seed"], "seed");
        if (seed < 0) throw ScenarioError("seed", "must be non-negative", line_of(root["seed"]));
        s.seed = static_cast<std::uint64_t>(seed);
    }

    if (const YAML::Node params = root["parameters"]) {
        if (!params.IsMap()) throw ScenarioError("parameters", "expected a mapping", line_of(params));
        for (const auto& kv : params) {
            const std::string name = kv.first.Scalar();
            if (std::find(kParameterNames.begin(), kParameterNames.end(), name) == kParameterNames.end()) {
                throw ScenarioError("parameters." + name, "unknown parameter", line_of(kv.first));
            }
            s.parameters[name] = parse_parameter(kv.second, "parameters." + name);
        }
    }

    if (const YAML::Node g = root["grid"]) {
        if (!g.IsMap()) throw ScenarioError("grid", "expected a mapping", line_of(g));
        reject_unknown_keys(g, {"N", "velocity", "modes", "compression_sign", "initial"}, "grid");
        if (g["N"]) {
            const long long n = as_integer(g["N"], "grid.N");
            if (n < 8 || n > 1024) throw ScenarioError("grid.N", "must be between 8 and 1024", line_of(g["N"]));
            s.grid.N = static_cast<int>(n);
        }
        if (g["velocity"]) s.grid.velocity = parse_velocity(g["velocity"]);
        if (g["modes"]) {
            const long long k = as_integer(g["modes"], "grid.modes");
            if (k < 1 || k > 10) throw ScenarioError("grid.modes", "must be between 1 and 10", line_of(g["modes"]));
            s.grid.modes = static_cast<int>(k);
        }
        if (g["compression_sign"]) {
            const std::string sign = as_string(g["compression_sign"], "grid.compression_sign");
            if (sign == "plus") s.grid.compression_sign = operators::CompressionSign::Plus;
            else if (sign == "minus") s.grid.compression_sign = operators::CompressionSign::Minus;
            else throw ScenarioError("grid.compression_sign", "expected 'plus' or 'minus'", line_of(g["compression_sign"]));
        }
        if (g["initial"]) {
            s.grid.initial = as_string(g["initial"], "grid.initial");
            if (s.grid.initial != "sin_x" && s.grid.initial != "beltrami" && s.grid.initial != "random") {
                throw ScenarioError("grid.initial", "expected sin_x, beltrami or random", line_of(g["initial"]));
            }
        }
    }

    int t_end_line = 0;
    int dt_line = 0;
    if (const YAML::Node t = root["time"]) {
        if (!t.IsMap()) throw ScenarioError("time", "expected a mapping", line_of(t));
        reject_unknown_keys(t, {"t_end", "dt"}, "time");
        if (t["t_end"]) {
            s.time.t_end = as_double(t["t_end"], "time.t_end");
            t_end_line = line_of(t["t_end"]);
        }
        if (t["dt"]) {
            s.time.dt = as_double(t["dt"], "time.dt");
            dt_line = line_of(t["dt"]);
        }
    }
    if (!(s.time.t_end > 0.0)) throw ScenarioError("time.t_end", "must be positive", t_end_line);
    if (!(s.time.dt > 0.0) || s.time.dt > s.time.t_end) {
        throw ScenarioError("time.dt", "must satisfy 0 < dt <= t_end", dt_line);
    }

    const YAML::Node outputs = root["outputs"];
    if (!outputs) throw ScenarioError("outputs", "missing list of outputs");
    if (!outputs.IsSequence()) throw ScenarioError("outputs", "expected a list", line_of(outputs));
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const std::string field = "outputs[" + std::to_string(i) + "]";
        const std::string name = as_string(outputs[i], field);
        OutputKind kind;
        if (name == "spectrum") kind = OutputKind::Spectrum;
        else if (name == "sweep") kind = OutputKind::Sweep;
        else if (name == "evolve") kind = OutputKind::Evolve;
        else if (name == "classify") kind = OutputKind::Classify;
        else if (name == "ricci_flow") kind = OutputKind::RicciFlow;
        else if (name == "discrepancy") kind = OutputKind::Discrepancy;
        else throw ScenarioError(field, "unknown output kind '" + name + "'", line_of(outputs[i]));
        if (std::find(s.outputs.begin(), s.outputs.end(), kind) != s.outputs.end()) {
            throw ScenarioError(field, "duplicate output kind '" + name + "'", line_of(outputs[i]));
        }
        s.outputs.push_back(kind);
    }

    validate(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read scenario file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

std::optional<double> SweepPoint::find(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) return std::nullopt;
    return it->second;
}

std::vector<SweepPoint> expand_points(const Scenario& s) {
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    for (const auto& name : kParameterNames) {
        if (s.has(name)) axes.emplace_back(name, s.parameters.at(name).values());
    }
    std::size_t total = 1;
    for (const auto& a : axes) total *= a.second.size();

    std::vector<SweepPoint> points;
    points.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        SweepPoint p;
        p.index = idx;
        std::size_t rest = idx;
        for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
            p.values[it->first] = it->second[rest % it->second.size()];
            rest /= it->second.size();
        }
        points.push_back(std::move(p));
    }
    return points;
}

} // namespace ricci_dynamo::cli
