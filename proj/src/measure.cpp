#include "ewc/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ewc {

bool intervals_disjoint_sorted(std::span<const Interval> sorted) {
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        if (sorted[i].hi > sorted[i + 1].lo) return false;
    }
    return true;
}

ControlMeasure::ControlMeasure() : breaks_{}, values_{1.0} {}

ControlMeasure::ControlMeasure(std::vector<double> breakpoints, std::vector<double> values)
    : breaks_(std::move(breakpoints)), values_(std::move(values)) {
    if (values_.size() != breaks_.size() + 1)
        throw std::invalid_argument("ControlMeasure: need one density value per piece (breakpoints+1)");
    double prev = 0.0;
    for (double b : breaks_) {
        if (!(b > prev))
            throw std::invalid_argument("ControlMeasure: breakpoints must be positive and strictly increasing");
        prev = b;
    }
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("ControlMeasure: density values must be finite and >= 0");
    }
    if (!(values_.back() > 0.0))
        throw std::invalid_argument("ControlMeasure: final density piece must be strictly positive "
                                    "(total mass must be infinite)");
}

double ControlMeasure::mass(const Interval& cell) const {
    if (!(cell.lo >= 0.0) || !(cell.hi >= cell.lo))
        throw std::invalid_argument("ControlMeasure::mass: interval must satisfy 0 <= lo <= hi");
    if (!std::isfinite(cell.hi))
        throw std::domain_error("ControlMeasure::mass: unbounded interval has infinite mass");
    return mass_below(cell.hi) - mass_below(cell.lo);
}

double ControlMeasure::mass(std::span<const Interval> cells) const {
    std::vector<Interval> sorted(cells.begin(), cells.end());
    std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    if (!intervals_disjoint_sorted(sorted))
        throw std::invalid_argument("ControlMeasure::mass: intervals overlap");
    double total = 0.0;
    for (const Interval& c : sorted) total += mass(c);
    return total;
}

double ControlMeasure::mass_below(double x) const {
    if (x <= 0.0) return 0.0;
    double acc = 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
        const double hi = breaks_[i];
        if (x <= hi) return acc + values_[i] * (x - lo);
        acc += values_[i] * (hi - lo);
        lo = hi;
    }
    return acc + values_.back() * (x - lo);
}

double ControlMeasure::quantile_below(double target_mass, double upper) const {
    if (target_mass <= 0.0) return 0.0;
    double acc = 0.0;
    double lo = 0.0;
    auto piece_end = [&](std::size_t i) {
        return i < breaks_.size() ? std::min(breaks_[i], upper) : upper;
    };
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double hi = piece_end(i);
        if (hi <= lo) break;
        const double piece_mass = values_[i] * (hi - lo);
        if (target_mass <= acc + piece_mass && values_[i] > 0.0) {
            return lo + (target_mass - acc) / values_[i];
        }
        acc += piece_mass;
        lo = hi;
        if (lo >= upper) break;
    }
    return upper;  // target at or beyond the restricted total mass
}

}  // namespace ewc
