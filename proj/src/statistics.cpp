#include "ero/statistics.hpp"

#include <cmath>

namespace ero {

void MomentAccumulator::add(double x) {
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.count_ == 0) return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double n_a = static_cast<double>(count_);
    const double n_b = static_cast<double>(other.count_);
    const double n = n_a + n_b;
    const double delta = other.mean_ - mean_;
    mean_ += delta * n_b / n;
    m2_ += other.m2_ + delta * delta * n_a * n_b / n;
    count_ += other.count_;
}

double MomentAccumulator::variance() const {
    if (count_ < 2) return 0.0;
    return m2_ / static_cast<double>(count_ - 1);
}

Estimate MomentAccumulator::estimate() const {
    Estimate e;
    e.mean = mean_;
    e.count = count_;
    e.std_error = count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
    return e;
}

Estimate estimate_of(std::span<const double> samples) {
    MomentAccumulator acc;
    for (double x : samples) acc.add(x);
    return acc.estimate();
}

double combined_std_error(const Estimate& a, const Estimate& b) {
    return std::hypot(a.std_error, b.std_error);
}

}  // namespace ero
