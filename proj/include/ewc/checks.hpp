#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ewc/config.hpp"
#include "ewc/diagram.hpp"
#include "ewc/empirical.hpp"
#include "ewc/stats.hpp"
#include "ewc/wiener.hpp"

namespace ewc {

// ---- standalone verification operations ------------------------------------

// Monte Carlo estimate of E[ I_{k1}^(n)(f) I_{k2}^(n)(g) ] over R replicates
// sharing one realization per replicate. Target is the exact finite-n cross
// moment; `limit` carries the asymptotic value (0 or k! <sym f, sym g>).
MomentEstimate estimate_cross_moment(const CellwiseFunction& f, const CellwiseFunction& g,
                                     std::int64_t n, std::int64_t R,
                                     const TriangularArraySchedule& sched, std::uint64_t stream,
                                     int threads = 0);

// Monte Carlo mean of I_k^(n)(f) against the exact mean formula target.
MomentEstimate check_mean_formula(const CellwiseFunction& f, std::int64_t n, std::int64_t R,
                                  const TriangularArraySchedule& sched, std::uint64_t stream,
                                  int threads = 0);

// Max over realizations of |LHS - RHS| / (1 + |LHS|) for the realization-wise
// product decomposition of I_{k1}(f) I_{k2}(g). Optionally prints the
// term-by-term expansion of the first realization as CSV rows
// (l, p, count, coefficient, empirical_integral_value).
double check_diagram_identity(const CellwiseFunction& f, const CellwiseFunction& g, std::int64_t n,
                              std::int64_t realizations, const TriangularArraySchedule& sched,
                              std::uint64_t stream, std::ostream* expansion_csv = nullptr);

struct FlimitRow {
    int l = 0;
    std::int64_t n = 0;
    double value = 0.0;
    double limit = 0.0;
};

// Deterministic sweep of F_l^(n)(f,g) over an n grid with its applicable
// limit (0 off the main diagonal cases; <sym f, sym g> when l = k1 = k2).
std::vector<FlimitRow> f_limit_sweep(const CellwiseFunction& f, const CellwiseFunction& g, int l,
                                     std::span<const std::int64_t> n_grid,
                                     const TriangularArraySchedule& sched);

struct KSReport {
    std::int64_t n = 0;
    int K_used = 0;
    double statistic = 0.0;
    double p_value = 0.0;
    std::int64_t replicates_per_side = 0;
    bool degenerate = false;
};

// Two-sample KS comparison of the truncated empirical chaos (K = K_n from the
// truncation rule) against the limit chaos, per n. The two sides use
// independent seed streams.
std::vector<KSReport> ks_convergence(const ChaosVector& h, std::span<const std::int64_t> n_grid,
                                     std::int64_t R, const KRule& rule,
                                     const TriangularArraySchedule& sched, std::uint64_t stream,
                                     int threads = 0);

// Skewness / excess-kurtosis CLT check for W_n(B).
ShapeReport gaussianity_check(std::span<const Interval> set, std::int64_t n, std::int64_t R,
                              const TriangularArraySchedule& sched, std::uint64_t stream,
                              int threads = 0);

// ---- experiment orchestration ----------------------------------------------

struct CheckOutcome {
    std::string id;
    bool pass = true;
    std::string detail;
};

struct RunResult {
    std::vector<CheckOutcome> outcomes;
    int exit_code = 0;  // 0 all pass, 1 failures (2 = config error, thrown before this)
};

// Runs the selected checks, writes results/<check>.csv files and summary.json
// under cfg.out_dir, and returns per-check outcomes. `expansion_csv`, when
// set, receives the diagram-check term table for the first configured pair.
RunResult run_experiment(const ExperimentConfig& cfg, const std::vector<std::string>& checks,
                         std::ostream* expansion_csv = nullptr);
RunResult run_experiment(const ExperimentConfig& cfg, std::ostream* expansion_csv = nullptr);

}  // namespace ewc
