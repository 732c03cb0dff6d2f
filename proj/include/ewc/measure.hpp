#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ewc {

// Half-open interval [lo, hi) on the half-line. Endpoints carry no mass
// (the control measure is non-atomic), so the convention only matters for
// disjointness checks and point membership.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x < hi; }
};

bool intervals_disjoint_sorted(std::span<const Interval> sorted);

// sigma-finite control measure on [0, inf): piecewise-constant nonnegative
// density with finitely many breakpoints. The last piece extends to infinity
// and must be strictly positive so the total mass is infinite.
//
// breakpoints b_1 < ... < b_m partition [0,inf) into m+1 pieces
// [0,b_1), [b_1,b_2), ..., [b_m,inf); values[i] is the density on piece i.
class ControlMeasure {
  public:
    // Lebesgue measure.
    ControlMeasure();
    ControlMeasure(std::vector<double> breakpoints, std::vector<double> values);

    double mass(const Interval& cell) const;
    // Total mass of a family of pairwise disjoint bounded intervals.
    double mass(std::span<const Interval> cells) const;
    // CDF of the measure restricted to [0, x]: mass([0, x)).
    double mass_below(double x) const;
    // Inverse of mass_below on [0, mass_below(upper)); used by the
    // point-sampling oracle.
    double quantile_below(double target_mass, double upper) const;

    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }

  private:
    std::vector<double> breaks_;   // interior breakpoints, strictly increasing
    std::vector<double> values_;   // breaks_.size() + 1 densities
};

}  // namespace ewc
