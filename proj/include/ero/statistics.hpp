#pragma once

#include <cstddef>
#include <span>

namespace ero {

/// Monte Carlo estimate: sample mean and its standard error.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

/// Streaming mean / second-moment accumulator with an order-stable merge.
class MomentAccumulator {
public:
    void add(double x);
    void merge(const MomentAccumulator& other);

    std::size_t count() const { return count_; }
    double mean() const { return mean_; }
    /// Sample variance (denominator count - 1); zero for fewer than two samples.
    double variance() const;
    Estimate estimate() const;

private:
    std::size_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

Estimate estimate_of(std::span<const double> samples);

/// sqrt(a.se^2 + b.se^2)
double combined_std_error(const Estimate& a, const Estimate& b);

}  // namespace ero
