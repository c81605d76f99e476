#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ricci_dynamo/cli/expression.hpp"
#include "ricci_dynamo/dynamo_operator.hpp"
#include "ricci_dynamo/errors.hpp"

namespace ricci_dynamo::cli {

/// Malformed or inconsistent scenario. `field` is the dotted path of the
/// offending entry, `line` is 1-based (0 when unknown).
class ScenarioError : public Error {
public:
    ScenarioError(std::string field, const std::string& message, int line = 0);

    const std::string& field() const { return field_; }
    int line() const { return line_; }

private:
    std::string field_;
    int line_;
};

enum class Model { Reduced, Grid };
enum class OutputKind { Spectrum, Sweep, Evolve, Classify, RicciFlow, Discrepancy };

std::string to_string(Model m);
std::string to_string(OutputKind k);

struct SweepRange {
    enum class Scale { Linear, Log };
    double min = 0.0;
    double max = 0.0;
    int count = 2;
    Scale scale = Scale::Linear;

    /// Ascending sample values, endpoints included.
    std::vector<double> values() const;
};

/// A scalar or a swept parameter.
struct Parameter {
    std::variant<double, SweepRange> value;

    bool swept() const { return std::holds_alternative<SweepRange>(value); }
    std::vector<double> values() const;
};

/// Velocity field on the grid: a named preset or two component expressions.
struct VelocitySpec {
    enum class Preset { Zero, Shear, Rotation, Expression };
    Preset preset = Preset::Zero;
    double amplitude = 0.0;
    std::string vx = "0";
    std::string vy = "0";

    grid::GridField sample(int n) const;
    std::string canonical() const;
};

struct GridSpec {
    int N = 32;
    VelocitySpec velocity;
    int modes = 4;
    operators::CompressionSign compression_sign = operators::CompressionSign::Plus;
    /// sin_x | beltrami | random
    std::string initial = "sin_x";
};

struct TimeSpec {
    double t_end = 1.0;
    double dt = 0.01;
};

/// Canonical parameter names in sweep order.
inline const std::vector<std::string> kParameterNames{"R", "theta", "eta", "rho", "Lambda"};

struct Scenario {
    Model model = Model::Reduced;
    std::map<std::string, Parameter> parameters;
    GridSpec grid;
    TimeSpec time;
    std::vector<OutputKind> outputs;
    std::uint64_t seed = 0;

    bool has(const std::string& name) const { return parameters.count(name) != 0; }

    /// Deterministic text form; the digest hashes this.
    std::string canonical() const;
    /// Hex SHA-256 of canonical().
    std::string digest() const;
};

/// Parses and validates scenario text (YAML). Throws ScenarioError.
Scenario parse_scenario(const std::string& text);
/// Reads and parses a scenario file. Throws ScenarioError, or IoError when unreadable.
Scenario load_scenario(const std::string& path);

/// One point of the Cartesian product of all parameter values, in
/// kParameterNames order with the last swept name varying fastest.
struct SweepPoint {
    std::size_t index = 0;
    std::map<std::string, double> values;

    double get(const std::string& name) const { return values.at(name); }
    std::optional<double> find(const std::string& name) const;
};

std::vector<SweepPoint> expand_points(const Scenario& s);

} // namespace ricci_dynamo::cli
