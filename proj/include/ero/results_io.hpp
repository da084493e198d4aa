#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ero {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ResultRow {
    std::string experiment_id;
    std::string model;
    std::string payoff;
    double strike = 0.0;
    int degree = 0;
    std::size_t paths = 0;
    int steps = 0;
    std::uint64_t seed = 0;
    double train_value = 0.0;
    double test_value = 0.0;
    double test_std_error = 0.0;
    int iterations = 0;
    int evaluations = 0;
    std::string stop_reason;
    double wall_time_s = 0.0;

    bool operator==(const ResultRow&) const = default;
};

/// Column names in order.
const std::vector<std::string>& result_columns();

/// Header line plus one line per row; doubles use shortest round-trip form.
std::string format_results(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results(const std::string& text);

/// Throws IoError naming the path.
void emit_results(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> read_results(const std::string& path);

}  // namespace ero
