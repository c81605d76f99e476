#include "ricci_dynamo/cli/result_table.hpp"

#include <chrono>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace ricci_dynamo::cli {

namespace {

using Json = nlohmann::ordered_json;

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s = buf;
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

// Reads an unquoted CSV field back into its typed cell.
Cell parse_bare(const std::string& s) {
    if (s.empty()) return std::monostate{};
    if (s == "true") return true;
    if (s == "false") return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    if (s.find_first_of(".eEni") == std::string::npos) {
        errno = 0;
        const long long v = std::strtoll(begin, &end, 10);
        if (*end == '\0' && errno == 0) return static_cast<std::int64_t>(v);
    }
    const double d = std::strtod(begin, &end);
    if (*end == '\0' && std::isfinite(d)) return d;
    return s;
}

bool needs_quotes(const std::string& s) {
    if (s.find_first_of(",\"\n\r") != std::string::npos) return true;
    return !std::holds_alternative<std::string>(parse_bare(s));
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

// Splits one CSV record; `quoted` marks fields that were quoted.
std::vector<std::pair<std::string, bool>> split_record(const std::string& line) {
    std::vector<std::pair<std::string, bool>> fields;
    std::string cur;
    bool quoted = false;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back(std::move(cur), quoted);
            cur.clear();
            quoted = false;
        } else {
            cur += c;
        }
    }
    if (in_quotes) throw SchemaMismatch("unterminated quoted CSV field");
    fields.emplace_back(std::move(cur), quoted);
    return fields;
}

Json to_json(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> Json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
            else return v;
        },
        cell);
}

Cell from_json(const Json& j) {
    switch (j.type()) {
        case Json::value_t::null: return std::monostate{};
        case Json::value_t::boolean: return j.get<bool>();
        case Json::value_t::number_integer:
        case Json::value_t::number_unsigned: return j.get<std::int64_t>();
        case Json::value_t::number_float: return j.get<double>();
        case Json::value_t::string: return j.get<std::string>();
        default: throw SchemaMismatch("unsupported JSON cell type");
    }
}

std::optional<double> numeric(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    return std::nullopt;
}

} // namespace

ResultTable::ResultTable(std::vector<std::string> columns, TableMetadata metadata)
    : columns_(std::move(columns)), metadata_(std::move(metadata)) {}

void ResultTable::add_row(Row row) {
    if (row.size() != columns_.size()) {
        throw SchemaMismatch("row has " + std::to_string(row.size()) + " cells, table has " +
                             std::to_string(columns_.size()) + " columns");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (const auto* d = std::get_if<double>(&row[i]); d && !std::isfinite(*d)) {
            throw InvalidArgument("non-finite value in column '" + columns_[i] + "'");
        }
    }
    rows_.push_back(std::move(row));
}

std::optional<std::size_t> ResultTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i] == name) return i;
    }
    return std::nullopt;
}

const Cell& ResultTable::at(std::size_t row, const std::string& name) const {
    const auto c = column(name);
    if (!c) throw SchemaMismatch("no column '" + name + "'");
    return rows_.at(row).at(*c);
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string format_cell(const Cell& cell) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) return "";
            else if constexpr (std::is_same_v<T, double>) return format_real(v);
            else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
            else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
            else return needs_quotes(v) ? quote(v) : v;
        },
        cell);
}

void write_csv(std::ostream& out, const ResultTable& table) {
    const auto& m = table.metadata();
    out << "# tool: " << m.tool << '\n'
        << "# version: " << m.version << '\n'
        << "# digest: " << m.digest << '\n'
        << "# timestamp: " << m.timestamp << '\n';
    for (std::size_t i = 0; i < table.columns().size(); ++i) {
        out << (i ? "," : "") << table.columns()[i];
    }
    out << '\n';
    for (const auto& row : table.rows()) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
        out << '\n';
    }
}

ResultTable read_csv(std::istream& in) {
    TableMetadata meta;
    std::string line;
    std::vector<std::string> columns;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ");
            if (colon == std::string::npos) continue;
            const std::string key = line.substr(2, colon - 2);
            const std::string value = line.substr(colon + 2);
            if (key == "tool") meta.tool = value;
            else if (key == "version") meta.version = value;
            else if (key == "digest") meta.digest = value;
            else if (key == "timestamp") meta.timestamp = value;
            continue;
        }
        for (auto& [name, q] : split_record(line)) columns.push_back(name);
        break;
    }
    if (columns.empty()) throw SchemaMismatch("CSV has no header row");
    ResultTable table(columns, meta);
    while (std::getline(in, line)) {
        Row row;
        for (auto& [text, quoted] : split_record(line)) {
            row.push_back(quoted ? Cell{text} : parse_bare(text));
        }
        table.add_row(std::move(row));
    }
    return table;
}

void write_json(std::ostream& out, const ResultTable& table) {
    const auto& m = table.metadata();
    Json doc;
    doc["metadata"] = {{"tool", m.tool}, {"version", m.version}, {"digest", m.digest}, {"timestamp", m.timestamp}};
    doc["columns"] = table.columns();
    Json rows = Json::array();
    for (const auto& row : table.rows()) {
        Json r = Json::array();
        for (const auto& cell : row) r.push_back(to_json(cell));
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    out << doc.dump(2) << '\n';
}

ResultTable read_json(std::istream& in) {
    Json doc;
    try {
        doc = Json::parse(in);
    } catch (const Json::exception& e) {
        throw SchemaMismatch(std::string("malformed JSON table: ") + e.what());
    }
    TableMetadata meta;
    const auto& m = doc.at("metadata");
    meta.tool = m.at("tool").get<std::string>();
    meta.version = m.at("version").get<std::string>();
    meta.digest = m.at("digest").get<std::string>();
    meta.timestamp = m.at("timestamp").get<std::string>();
    ResultTable table(doc.at("columns").get<std::vector<std::string>>(), meta);
    for (const auto& r : doc.at("rows")) {
        Row row;
        for (const auto& cell : r) row.push_back(from_json(cell));
        table.add_row(std::move(row));
    }
    return table;
}

std::string to_string(PlotKind kind) {
    switch (kind) {
        case PlotKind::GrowthCurve: return "growth_curve";
        case PlotKind::SpectrumScatter: return "spectrum_scatter";
        case PlotKind::RegimeMap: return "regime_map";
    }
    return "unknown";
}

std::vector<std::string> plot_columns(PlotKind kind) {
    switch (kind) {
        case PlotKind::GrowthCurve: return {"t", "log_energy"};
        case PlotKind::SpectrumScatter: return {"re", "im", "source_code"};
        case PlotKind::RegimeMap: return {"rho", "R", "regime_code"};
    }
    return {};
}

void emit_plotdata(std::ostream& out, const ResultTable& table, PlotKind kind) {
    const auto wanted = plot_columns(kind);
    std::vector<std::size_t> idx;
    std::string missing;
    for (const auto& name : wanted) {
        if (const auto c = table.column(name)) idx.push_back(*c);
        else missing += (missing.empty() ? "" : ", ") + name;
    }
    if (!missing.empty()) {
        throw SchemaMismatch(to_string(kind) + " needs missing column(s): " + missing);
    }
    const auto point = table.column("point");

    out << "# " << to_string(kind) << '\n' << "# columns:";
    for (const auto& name : wanted) out << ' ' << name;
    out << '\n' << "# digest: " << table.metadata().digest << '\n';

    std::optional<Cell> last_point;
    char buf[64];
    for (const auto& row : table.rows()) {
        std::vector<double> values;
        for (std::size_t c : idx) {
            if (const auto v = numeric(row[c])) values.push_back(*v);
        }
        if (values.size() != idx.size()) continue;
        if (point && kind == PlotKind::GrowthCurve) {
            if (last_point && *last_point != row[*point]) out << "\n\n";
            last_point = row[*point];
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", values[i]);
            out << (i ? " " : "") << buf;
        }
        out << '\n';
    }
}

void emit_plotdata(const std::filesystem::path& path, const ResultTable& table, PlotKind kind) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write plot data '" + path.string() + "'");
    emit_plotdata(out, table, kind);
    if (!out) throw IoError("failed writing plot data '" + path.string() + "'");
}

} // namespace ricci_dynamo::cli
