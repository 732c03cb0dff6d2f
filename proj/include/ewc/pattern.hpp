#pragma once

#include <utility>
#include <vector>

#include "ewc/integrand.hpp"

namespace ewc {

// Both integral evaluators reduce a coefficient tuple to its cell-occupancy
// pattern {(cell, multiplicity)} and multiply per-cell kernel values: the
// falling-factorial kernel on the empirical side, the Hermite kernel on the
// Gaussian side. Terms with identical patterns are merged up front, which
// collapses the permutation orbit of symmetrized integrands.
struct PatternTerm {
    double coeff;
    std::vector<std::pair<int, int>> factors;  // (cell index, multiplicity), ascending cells
};

struct EvalPlan {
    int order = 0;
    int max_mult = 0;
    int grid_size = 0;
    std::vector<PatternTerm> terms;
};

EvalPlan compile_plan(const CellwiseFunction& f);

// Evaluate sum_terms coeff * prod_j kernel(cell_j, mult_j) given a dense
// kernel table indexed [cell * (max_mult+1) + mult].
double evaluate_plan(const EvalPlan& plan, const std::vector<double>& kernel_table);

}  // namespace ewc
