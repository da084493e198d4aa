#include "ero/results_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ero {

namespace {

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

template <class Int>
std::string format_int(Int x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Splits CSV text into records of fields, honoring quoted fields.
std::vector<std::vector<std::string>> split_records(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                fields.push_back(std::move(field));
                records.push_back(std::move(fields));
            }
            fields.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw std::invalid_argument("csv: unterminated quoted field");
    if (any || !field.empty()) {
        fields.push_back(std::move(field));
        records.push_back(std::move(fields));
    }
    return records;
}

template <class T>
T parse_number(const std::string& s, const char* column) {
    T value{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument(std::string("csv: bad value '") + s + "' in column " + column);
    }
    return value;
}

}  // namespace

const std::vector<std::string>& result_columns() {
    static const std::vector<std::string> columns = {
        "experiment_id", "model",      "payoff",         "K",          "k",
        "M",             "N",          "seed",           "train_value", "test_value",
        "test_std_error", "iterations", "evaluations",   "stop_reason", "wall_time_s"};
    return columns;
}

std::string format_results(const std::vector<ResultRow>& rows) {
    std::string out;
    const auto& columns = result_columns();
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out += ',';
        out += columns[i];
    }
    out += '\n';
    for (const auto& r : rows) {
        const std::vector<std::string> fields = {
            quote(r.experiment_id),        quote(r.model),
            quote(r.payoff),               format_double(r.strike),
            format_int(r.degree),          format_int(r.paths),
            format_int(r.steps),           format_int(r.seed),
            format_double(r.train_value),  format_double(r.test_value),
            format_double(r.test_std_error), format_int(r.iterations),
            format_int(r.evaluations),     quote(r.stop_reason),
            format_double(r.wall_time_s)};
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += fields[i];
        }
        out += '\n';
    }
    return out;
}

std::vector<ResultRow> parse_results(const std::string& text) {
    const auto records = split_records(text);
    if (records.empty() || records.front() != result_columns()) {
        throw std::invalid_argument("csv: missing or unexpected header");
    }
    std::vector<ResultRow> rows;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& f = records[i];
        if (f.size() != result_columns().size()) {
            throw std::invalid_argument("csv: record " + std::to_string(i) + " has the wrong field count");
        }
        ResultRow r;
        r.experiment_id = f[0];
        r.model = f[1];
        r.payoff = f[2];
        r.strike = parse_number<double>(f[3], "K");
        r.degree = parse_number<int>(f[4], "k");
        r.paths = parse_number<std::size_t>(f[5], "M");
        r.steps = parse_number<int>(f[6], "N");
        r.seed = parse_number<std::uint64_t>(f[7], "seed");
        r.train_value = parse_number<double>(f[8], "train_value");
        r.test_value = parse_number<double>(f[9], "test_value");
        r.test_std_error = parse_number<double>(f[10], "test_std_error");
        r.iterations = parse_number<int>(f[11], "iterations");
        r.evaluations = parse_number<int>(f[12], "evaluations");
        r.stop_reason = f[13];
        r.wall_time_s = parse_number<double>(f[14], "wall_time_s");
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit_results(const std::vector<ResultRow>& rows, const std::string& path) {
    const std::string text = format_results(rows);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<ResultRow> read_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_results(buffer.str());
}

}  // namespace ero
