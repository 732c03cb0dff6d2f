#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "ewc/pattern.hpp"
#include "ewc/rng.hpp"
#include "ewc/schedule.hpp"

namespace ewc {

// Schedule-derived quantities of one grid at one array level n; shared by all
// replicates of a sampling loop.
class CellFrame {
  public:
    CellFrame(TriangularArraySchedule sched, Grid grid, std::int64_t n);

    const TriangularArraySchedule& sched() const { return sched_; }
    const Grid& grid() const { return grid_; }
    std::int64_t n() const { return n_; }
    double a_n() const { return a_n_; }
    double window_end() const { return window_end_; }
    const std::vector<double>& pn() const { return pn_; }  // P_n(A_i)
    double pn_rest() const { return pn_rest_; }            // P_n(E_n minus grid)

  private:
    TriangularArraySchedule sched_;
    Grid grid_;
    std::int64_t n_;
    double a_n_;
    double window_end_;
    std::vector<double> pn_;
    double pn_rest_;
};

struct SeedInfo {
    std::uint64_t stream = 0;
    std::uint64_t replicate = 0;
};

// Per-cell occupancy of one row of the triangular array. Sufficient statistic
// for every cellwise integrand; the points themselves are never needed.
struct CellCounts {
    std::shared_ptr<const CellFrame> frame;
    std::vector<std::int64_t> counts;  // per grid cell
    std::int64_t rest = 0;             // sample points in E_n outside the grid
    SeedInfo seed;
};

// Counts ~ multinomial(n; P_n(A_1), ..., P_n(A_t), rest). Deterministic given
// the seed info.
CellCounts draw_counts(std::shared_ptr<const CellFrame> frame, SeedInfo seed);
CellCounts draw_counts(std::shared_ptr<const CellFrame> frame, Engine& eng, SeedInfo seed = {});

// Point-level representation, retained as the independent oracle.
struct PointSample {
    std::shared_ptr<const CellFrame> frame;
    std::vector<double> points;  // n points in [0, e(n))
    SeedInfo seed;
};

PointSample draw_points(std::shared_ptr<const CellFrame> frame, SeedInfo seed);
CellCounts counts_from_points(const PointSample& sample);

// Normalized empirical measure of a union of grid cells:
// W_n(B) = a_n^{-1/2} (N(B) - n P_n(B)).
double w_n(const CellCounts& counts, std::span<const Interval> cells);
double w_n_cell(const CellCounts& counts, int cell_index);

// Multiple empirical integral of a cellwise integrand against W_n, excluding
// the diagonals, evaluated exactly from occupancy counts. The per-cell kernel
// at multiplicity m is
//   a_n^{-m/2} sum_{d=0}^{m} C(m,d) (N_A)_d (-n P_n(A))^{m-d},
// with (N)_d the falling factorial: d slots take distinct sample atoms, the
// rest integrate against -n P_n; cross-cell exclusion is automatic because
// cells are disjoint, and atom/P_n diagonal overlaps are null since P_n is
// non-atomic.
double empirical_integral(const EvalPlan& plan, const CellCounts& counts);
double empirical_integral(const CellwiseFunction& f, const CellCounts& counts);

// Direct O((n+1)^k) expansion over atom assignments; the oracle the fast
// evaluator is checked against.
double empirical_integral_bruteforce(const CellwiseFunction& f, const PointSample& sample);

// Unexpanded tensor-power fast path: sum over occupancy vectors of the base
// support instead of over coefficient tuples.
double empirical_integral_tensor_power(const StepFunction& g, int k, const CellCounts& counts);

// sum_{k<=K} I_k^(n)(h^(k)) on one realization.
double truncated_chaos(const std::vector<EvalPlan>& component_plans, int K, const CellCounts& counts);
double truncated_chaos(const ChaosVector& h, int K, const CellCounts& counts);

// Truncation order K_n = floor(c * ln(n/a_n)^(1-eps)), clamped at 0; returns
// 0 and sets *warned when n/a_n <= 1.
int k_schedule(std::int64_t n, double c, double eps, const TriangularArraySchedule& sched,
               bool* warned = nullptr);

inline constexpr int kMaxMultiplicity = 20;

}  // namespace ewc
