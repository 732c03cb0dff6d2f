#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ewc/measure.hpp"

namespace ewc {

// Growing-window rule n -> e(n); the observation window at level n is
// E_n = [0, e(n)).
struct WindowRule {
    enum class Kind { Power, Log, Table };

    Kind kind = Kind::Power;
    double alpha = 0.5;           // Power: e(n) = n^alpha
    std::vector<double> table;    // Table: e(n) = table[n-1]

    static WindowRule power(double alpha);
    static WindowRule log();
    static WindowRule from_table(std::vector<double> values);

    double eval(std::int64_t n) const;
};

struct ScheduleCheck {
    std::string name;
    bool pass = true;
    std::string detail;
};

struct ScheduleReport {
    std::vector<ScheduleCheck> checks;
    bool pass = true;
};

// The triangular-array sampling schedule: a control measure mu on [0,inf),
// windows E_n = [0, e(n)), normalizers a_n = n / mu(E_n), row distributions
// P_n(B) = mu(B cap E_n) / mu(E_n) and restricted measures
// mu_n(B) = (n/a_n) P_n(B) = mu(B cap E_n).
//
// Immutable after construction; safe to share across threads.
class TriangularArraySchedule {
  public:
    TriangularArraySchedule(ControlMeasure control, WindowRule window);

    // Defaults: Lebesgue control measure, e(n) = sqrt(n).
    static TriangularArraySchedule standard();

    const ControlMeasure& control() const { return control_; }
    const WindowRule& window() const { return window_; }

    double window_end(std::int64_t n) const;      // e(n)
    double window_mass(std::int64_t n) const;     // mu(E_n)
    double a_n(std::int64_t n) const;             // n / mu(E_n)

    // mu(cells); cells pairwise disjoint and bounded.
    double mu_mass(std::span<const Interval> cells) const;
    // P_n(cells) = mu(cells cap E_n) / mu(E_n).
    double p_n(std::span<const Interval> cells, std::int64_t n) const;
    // mu_n(cells) = mu(cells cap E_n).
    double mu_n_mass(std::span<const Interval> cells, std::int64_t n) const;

    double mu_mass(const Interval& cell) const;
    double p_n(const Interval& cell, std::int64_t n) const;
    double mu_n_mass(const Interval& cell, std::int64_t n) const;

    // Finite-grid surrogate checks for the schedule assumptions: nested
    // windows, positive window mass, a_n increasing, a_n/n decreasing, and
    // mu_n monotone in n on a fixed probe family of intervals.
    ScheduleReport validate(std::span<const std::int64_t> n_grid) const;

  private:
    ControlMeasure control_;
    WindowRule window_;
};

}  // namespace ewc
