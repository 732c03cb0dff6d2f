#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "ewc/empirical.hpp"
#include "ewc/pattern.hpp"
#include "ewc/rng.hpp"
#include "ewc/schedule.hpp"

namespace ewc {

// Grid plus control-measure cell masses; shared by all Gaussian replicates.
class GaussianFrame {
  public:
    GaussianFrame(TriangularArraySchedule sched, Grid grid);

    const TriangularArraySchedule& sched() const { return sched_; }
    const Grid& grid() const { return grid_; }
    const std::vector<double>& mu() const { return mu_; }  // mu(A_i)

  private:
    TriangularArraySchedule sched_;
    Grid grid_;
    std::vector<double> mu_;
};

// One draw of the Brownian random measure on the grid: independent centered
// Gaussians with Var W(A_i) = mu(A_i).
struct GaussianCellRealization {
    std::shared_ptr<const GaussianFrame> frame;
    std::vector<double> values;
    SeedInfo seed;
};

GaussianCellRealization sample_gaussian_cells(std::shared_ptr<const GaussianFrame> frame,
                                              SeedInfo seed);

// Probabilists' Hermite polynomial H_m via the three-term recurrence.
double hermite(int m, double x);

// Multiple Wiener-Ito integral of a cellwise integrand, excluding diagonals,
// evaluated exactly on the realization. Per-cell kernel at multiplicity m:
//   mu(A)^{m/2} H_m( W(A) / sqrt(mu(A)) ),   0 if mu(A) = 0 and m >= 1.
// For simple integrands this reduces to sum coeff * prod W(A_{i_j}).
double wiener_integral(const EvalPlan& plan, const GaussianCellRealization& real);
double wiener_integral(const CellwiseFunction& f, const GaussianCellRealization& real);

double wiener_integral_tensor_power(const StepFunction& g, int k,
                                    const GaussianCellRealization& real);

// sum_{k<=K} I_k(h^(k)) with all orders sharing the one realization.
double chaos_series(const std::vector<EvalPlan>& component_plans, int K,
                    const GaussianCellRealization& real);
double chaos_series(const ChaosVector& h, int K, const GaussianCellRealization& real);

}  // namespace ewc
