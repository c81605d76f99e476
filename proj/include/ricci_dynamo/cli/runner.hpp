#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "ricci_dynamo/cli/result_table.hpp"
#include "ricci_dynamo/cli/scenario.hpp"

namespace ricci_dynamo::cli {

std::string tool_version();

enum class OutputFormat { Csv, Json, Both };

/// Exit statuses of the batch runner.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitParse = 2,
    kExitNumerical = 3,
    kExitIo = 4,
};

struct RunOptions {
    std::filesystem::path out = "out";
    int threads = 1;
    OutputFormat format = OutputFormat::Both;
    /// Overrides the metadata timestamp (otherwise the current UTC time).
    std::optional<std::string> timestamp;
};

/// A sweep point failed numerically; the message names the point.
class PointFailure : public Error {
public:
    using Error::Error;
};

/// Evaluates every requested output over all sweep points with `threads`
/// workers. Rows are ordered by sweep index. Throws PointFailure.
std::map<OutputKind, ResultTable> compute_outputs(const Scenario& scenario, int threads,
                                                  const TableMetadata& metadata);

/// Writes <out>/<kind>.csv, .json and, where a plot kind applies, .dat.
/// Throws IoError.
void write_outputs(const std::map<OutputKind, ResultTable>& tables, const RunOptions& options);

/// Worker count: RICCI_DYNAMO_THREADS when set, else `requested`.
/// Throws InvalidArgument for a malformed or non-positive value.
int resolve_threads(int requested);

/// Parses, runs and writes a scenario, reporting diagnostics on `err`.
/// Returns one of the ExitCode values.
int run_scenario(const std::string& path, const RunOptions& options, std::ostream& log, std::ostream& err);

/// Parses a scenario only. Returns kExitOk, kExitParse or kExitIo.
int validate_scenario(const std::string& path, std::ostream& log, std::ostream& err);

} // namespace ricci_dynamo::cli
