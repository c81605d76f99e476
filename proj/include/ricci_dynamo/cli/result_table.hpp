#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ricci_dynamo/errors.hpp"

namespace ricci_dynamo::cli {

/// Empty, real, integer, boolean or text cell.
using Cell = std::variant<std::monostate, double, std::int64_t, bool, std::string>;
using Row = std::vector<Cell>;

struct TableMetadata {
    std::string tool = "ricci_dynamo";
    std::string version;
    std::string digest;
    std::string timestamp;

    bool operator==(const TableMetadata&) const = default;
};

class ResultTable {
public:
    ResultTable() = default;
    explicit ResultTable(std::vector<std::string> columns, TableMetadata metadata = {});

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<Row>& rows() const { return rows_; }
    const TableMetadata& metadata() const { return metadata_; }
    void set_metadata(TableMetadata m) { metadata_ = std::move(m); }

    /// Throws SchemaMismatch on a wrong cell count, InvalidArgument on a
    /// non-finite real.
    void add_row(Row row);

    /// Index of a column, if present.
    std::optional<std::size_t> column(const std::string& name) const;
    const Cell& at(std::size_t row, const std::string& name) const;

    bool operator==(const ResultTable& other) const = default;

private:
    std::vector<std::string> columns_;
    std::vector<Row> rows_;
    TableMetadata metadata_;
};

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

/// Text form of a cell as written to CSV. Reals always carry a '.', an exponent
/// or both so they read back as reals.
std::string format_cell(const Cell& cell);

/// '#'-prefixed metadata lines, then a header row, then data rows.
void write_csv(std::ostream& out, const ResultTable& table);
ResultTable read_csv(std::istream& in);

/// {"metadata": {...}, "columns": [...], "rows": [[...], ...]}
void write_json(std::ostream& out, const ResultTable& table);
ResultTable read_json(std::istream& in);

enum class PlotKind { GrowthCurve, SpectrumScatter, RegimeMap };

std::string to_string(PlotKind kind);
/// Columns a table needs for a plot kind.
std::vector<std::string> plot_columns(PlotKind kind);

/// Whitespace-delimited plot data with a commented header naming the columns
/// and the scenario digest. Rows whose plot cells are not all numeric are
/// skipped; a change in the "point" column starts a new data block.
/// Throws SchemaMismatch listing missing columns.
void emit_plotdata(std::ostream& out, const ResultTable& table, PlotKind kind);
void emit_plotdata(const std::filesystem::path& path, const ResultTable& table, PlotKind kind);

} // namespace ricci_dynamo::cli
