#include "ewc/pattern.hpp"

#include <algorithm>
#include <map>

namespace ewc {

EvalPlan compile_plan(const CellwiseFunction& f) {
    std::map<std::vector<std::pair<int, int>>, double> merged;
    std::vector<int> sorted;
    for (const auto& [idx, v] : f.coeffs()) {
        sorted.assign(idx.begin(), idx.end());
        std::sort(sorted.begin(), sorted.end());
        std::vector<std::pair<int, int>> pattern;
        for (std::size_t i = 0; i < sorted.size();) {
            std::size_t j = i;
            while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
            pattern.emplace_back(sorted[i], static_cast<int>(j - i));
            i = j;
        }
        merged[pattern] += v;
    }
    EvalPlan plan;
    plan.order = f.order();
    plan.grid_size = f.grid().size();
    for (auto& [pattern, coeff] : merged) {
        if (coeff == 0.0) continue;
        for (const auto& [cell, m] : pattern) plan.max_mult = std::max(plan.max_mult, m);
        plan.terms.push_back(PatternTerm{coeff, pattern});
    }
    return plan;
}

double evaluate_plan(const EvalPlan& plan, const std::vector<double>& kernel_table) {
    const int stride = plan.max_mult + 1;
    // Kahan-compensated accumulation in a fixed term order.
    double sum = 0.0;
    double comp = 0.0;
    for (const PatternTerm& t : plan.terms) {
        double prod = t.coeff;
        for (const auto& [cell, m] : t.factors)
            prod *= kernel_table[static_cast<std::size_t>(cell * stride + m)];
        const double y = prod - comp;
        const double s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    return sum;
}

}  // namespace ewc
