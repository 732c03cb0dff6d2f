#include "ewc/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ewc {

WindowRule WindowRule::power(double alpha) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("WindowRule::power: alpha must be > 0");
    WindowRule w;
    w.kind = Kind::Power;
    w.alpha = alpha;
    return w;
}

WindowRule WindowRule::log() {
    WindowRule w;
    w.kind = Kind::Log;
    return w;
}

WindowRule WindowRule::from_table(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("WindowRule::from_table: empty table");
    for (double v : values)
        if (!(v > 0.0)) throw std::invalid_argument("WindowRule::from_table: entries must be > 0");
    WindowRule w;
    w.kind = Kind::Table;
    w.table = std::move(values);
    return w;
}

double WindowRule::eval(std::int64_t n) const {
    if (n < 1) throw std::domain_error("WindowRule::eval: n must be >= 1");
    switch (kind) {
        case Kind::Power:
            return std::pow(static_cast<double>(n), alpha);
        case Kind::Log:
            return std::log1p(static_cast<double>(n));
        case Kind::Table:
            if (static_cast<std::size_t>(n) > table.size())
                throw std::domain_error("WindowRule::eval: n beyond table range");
            return table[static_cast<std::size_t>(n - 1)];
    }
    throw std::logic_error("WindowRule::eval: bad kind");
}

TriangularArraySchedule::TriangularArraySchedule(ControlMeasure control, WindowRule window)
    : control_(std::move(control)), window_(std::move(window)) {}

TriangularArraySchedule TriangularArraySchedule::standard() {
    return TriangularArraySchedule(ControlMeasure(), WindowRule::power(0.5));
}

double TriangularArraySchedule::window_end(std::int64_t n) const { return window_.eval(n); }

double TriangularArraySchedule::window_mass(std::int64_t n) const {
    return control_.mass_below(window_end(n));
}

double TriangularArraySchedule::a_n(std::int64_t n) const {
    const double m = window_mass(n);
    if (!(m > 0.0)) throw std::domain_error("TriangularArraySchedule: mu(E_n) must be > 0");
    return static_cast<double>(n) / m;
}

double TriangularArraySchedule::mu_mass(std::span<const Interval> cells) const {
    return control_.mass(cells);
}

double TriangularArraySchedule::mu_n_mass(std::span<const Interval> cells, std::int64_t n) const {
    if (n < 1) throw std::domain_error("mu_n_mass: n must be >= 1");
    const double e = window_end(n);
    double total = 0.0;
    std::vector<Interval> sorted(cells.begin(), cells.end());
    std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    if (!intervals_disjoint_sorted(sorted))
        throw std::invalid_argument("mu_n_mass: intervals overlap");
    for (const Interval& c : sorted) {
        Interval clipped{c.lo, std::min(c.hi, e)};
        if (clipped.hi > clipped.lo) total += control_.mass(clipped);
    }
    return total;
}

double TriangularArraySchedule::p_n(std::span<const Interval> cells, std::int64_t n) const {
    if (n < 1) throw std::domain_error("p_n: n must be >= 1");
    const double m = window_mass(n);
    if (!(m > 0.0)) throw std::domain_error("p_n: mu(E_n) must be > 0");
    return mu_n_mass(cells, n) / m;
}

double TriangularArraySchedule::mu_mass(const Interval& cell) const { return control_.mass(cell); }

double TriangularArraySchedule::p_n(const Interval& cell, std::int64_t n) const {
    return p_n(std::span<const Interval>(&cell, 1), n);
}

double TriangularArraySchedule::mu_n_mass(const Interval& cell, std::int64_t n) const {
    return mu_n_mass(std::span<const Interval>(&cell, 1), n);
}

namespace {

std::string fmt_n(std::int64_t n) {
    std::ostringstream os;
    os << "n=" << n;
    return os.str();
}

}  // namespace

ScheduleReport TriangularArraySchedule::validate(std::span<const std::int64_t> n_grid) const {
    if (n_grid.empty()) throw std::invalid_argument("validate: empty n grid");
    for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
        if (!(n_grid[i] < n_grid[i + 1]))
            throw std::invalid_argument("validate: n grid must be strictly increasing");

    ScheduleReport report;
    auto add = [&](std::string name, bool pass, std::string detail) {
        report.checks.push_back({std::move(name), pass, std::move(detail)});
        report.pass = report.pass && pass;
    };

    const double mono_tol = 1e-12;

    {  // nested windows
        bool ok = true;
        std::string detail;
        for (std::size_t i = 0; i + 1 < n_grid.size() && ok; ++i) {
            if (window_end(n_grid[i]) > window_end(n_grid[i + 1]) * (1 + mono_tol)) {
                ok = false;
                detail = "window shrinks at " + fmt_n(n_grid[i + 1]);
            }
        }
        add("nestedness", ok, detail);
    }
    {  // positive window mass
        bool ok = true;
        std::string detail;
        for (std::int64_t n : n_grid) {
            if (!(window_mass(n) > 0.0)) {
                ok = false;
                detail = "mu(E_n)=0 at " + fmt_n(n);
                break;
            }
        }
        add("window_mass_positive", ok, detail);
        if (!ok) return report;  // a_n undefined below
    }
    {  // a_n increasing trend (surrogate for a_n -> infinity)
        bool ok = true;
        std::string detail;
        for (std::size_t i = 0; i + 1 < n_grid.size(); ++i) {
            if (a_n(n_grid[i]) > a_n(n_grid[i + 1]) * (1 + mono_tol)) {
                ok = false;
                detail = "a_n decreases at " + fmt_n(n_grid[i + 1]);
                break;
            }
        }
        add("a_n_increasing", ok, detail);
    }
    {  // a_n/n decreasing trend (surrogate for a_n = o(n))
        bool ok = true;
        std::string detail;
        for (std::size_t i = 0; i + 1 < n_grid.size(); ++i) {
            const double r0 = a_n(n_grid[i]) / static_cast<double>(n_grid[i]);
            const double r1 = a_n(n_grid[i + 1]) / static_cast<double>(n_grid[i + 1]);
            if (r1 > r0 * (1 + mono_tol)) {
                ok = false;
                detail = "a_n/n increases at " + fmt_n(n_grid[i + 1]);
                break;
            }
        }
        add("a_n_over_n_decreasing", ok, detail);
    }
    {  // mu_n monotone towards mu on a probe family
        const Interval probes[] = {{0.0, 1.0}, {1.0, 2.0}, {0.0, 10.0}, {5.0, 50.0}};
        bool ok = true;
        std::string detail;
        for (const Interval& b : probes) {
            const double cap = control_.mass(b);
            double prev = -1.0;
            for (std::int64_t n : n_grid) {
                const double m = mu_n_mass(b, n);
                if (m < prev * (1 - mono_tol) || m > cap * (1 + mono_tol) + mono_tol) {
                    ok = false;
                    detail = "mu_n not monotone/dominated on probe at " + fmt_n(n);
                    break;
                }
                prev = m;
            }
            if (!ok) break;
        }
        add("mu_n_monotone", ok, detail);
    }
    return report;
}

}  // namespace ewc
