#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ewc/grid.hpp"
#include "ewc/schedule.hpp"

namespace ewc {

// Which closed-form measure a mass/inner-product evaluation runs against.
enum class MeasureKind { Mu, MuN, Pn };

// Per-cell masses of a grid under mu, mu_n or P_n. All integrals in this
// library reduce to sums over these.
std::vector<double> cell_masses(const Grid& grid, const TriangularArraySchedule& sched,
                                MeasureKind kind, std::int64_t n = 0);

using IndexTuple = std::vector<int>;  // cell indices, 0-based, length = order

// Order-k function on E^k that is constant on products of grid cells:
//     f = sum over tuples (i_1..i_k) of coeff * 1_{A_{i_1} x ... x A_{i_k}}.
// Sparse coefficient storage; the map ordering makes iteration deterministic.
// Order 0 is a single constant stored under the empty tuple.
class CellwiseFunction {
  public:
    CellwiseFunction(int order, Grid grid);
    static CellwiseFunction constant(double value);
    // Indicator of a product of intervals, times `scale`; each interval must
    // be a union of grid cells. Slot j of the product is `factors[j]`.
    static CellwiseFunction product_indicator(const Grid& grid, const std::vector<Interval>& factors,
                                              double scale = 1.0);

    int order() const { return order_; }
    const Grid& grid() const { return grid_; }
    const std::map<IndexTuple, double>& coeffs() const { return coeffs_; }
    std::size_t nonzeros() const { return coeffs_.size(); }

    void set(const IndexTuple& idx, double value);
    void add(const IndexTuple& idx, double value);
    double at(const IndexTuple& idx) const;  // 0 when absent

    // True iff every tuple with a repeated index has zero coefficient, i.e.
    // the function is simple (vanishes on the diagonals).
    bool vanishes_on_repeats() const;

    // Same function re-expressed on a refinement of its grid. `map` lists,
    // for each original cell, the refined cells tiling it.
    CellwiseFunction on_refined(const Grid& refined, const std::vector<std::vector<int>>& map) const;

    CellwiseFunction& scale(double s);

  private:
    int order_;
    Grid grid_;
    std::map<IndexTuple, double> coeffs_;
};

// Step function g on E: one value per grid cell, zero off-grid. The base of
// tensor powers.
struct StepFunction {
    Grid grid;
    std::vector<double> values;

    StepFunction(Grid g, std::vector<double> v);
    double l2_norm_sq(const TriangularArraySchedule& sched, MeasureKind kind, std::int64_t n = 0) const;
};

// g tensored with itself `power` times, kept unexpanded.
struct TensorPowerFunction {
    StepFunction base;
    int power;

    TensorPowerFunction(StepFunction b, int k);
};

// Default cap on sparse-coefficient blowup for expansion/tensor operations.
inline constexpr std::size_t kCoeffBudget = 1'000'000;

// Permutation-average (1/k!) sum_sigma f(u_sigma(1..k)). Idempotent linear
// projection; contracts the L2 norm.
CellwiseFunction symmetrize(const CellwiseFunction& f, std::size_t budget = kCoeffBudget);

// f tensor g on the common refined grid: coeff(t1||t2) = f(t1) * g(t2).
CellwiseFunction tensor(const CellwiseFunction& f, const CellwiseFunction& g,
                        std::size_t budget = kCoeffBudget);

// <f, g> under measure^k on the common refined grid; orders must match.
double l2_inner(const CellwiseFunction& f, const CellwiseFunction& g,
                const TriangularArraySchedule& sched, MeasureKind kind, std::int64_t n = 0);

// Full product-measure integral m^k(f) = sum coeff * prod masses.
double product_integral(const CellwiseFunction& f, const TriangularArraySchedule& sched,
                        MeasureKind kind, std::int64_t n = 0);

CellwiseFunction expand_tensor_power(const StepFunction& g, int k, std::size_t budget = kCoeffBudget);

// Integrand vector h = (h^(0), h^(1), ..., h^(K_max)); components beyond the
// stored range are zero.
struct ChaosVector {
    std::vector<CellwiseFunction> components;  // components[k] has order k

    explicit ChaosVector(std::vector<CellwiseFunction> comps);
    int k_max() const { return static_cast<int>(components.size()) - 1; }
};

// || h ||_H = sqrt( sum_k k! * || sym h^(k) ||^2_{L2(mu^k)} ).
double h_norm(const ChaosVector& h, const TriangularArraySchedule& sched);

double factorial(int k);

}  // namespace ewc
