#include "ewc/wiener.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace ewc {

GaussianFrame::GaussianFrame(TriangularArraySchedule sched, Grid grid)
    : sched_(std::move(sched)), grid_(std::move(grid)) {
    mu_.resize(static_cast<std::size_t>(grid_.size()));
    for (int i = 0; i < grid_.size(); ++i)
        mu_[static_cast<std::size_t>(i)] = sched_.mu_mass(grid_.cell(i));
}

GaussianCellRealization sample_gaussian_cells(std::shared_ptr<const GaussianFrame> frame,
                                              SeedInfo seed) {
    Engine eng = make_engine(seed.stream, seed.replicate);
    GaussianCellRealization r;
    r.frame = frame;
    r.seed = seed;
    r.values.resize(frame->mu().size());
    std::normal_distribution<double> std_normal(0.0, 1.0);
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        const double var = frame->mu()[i];
        r.values[i] = var > 0.0 ? std::sqrt(var) * std_normal(eng) : 0.0;
    }
    return r;
}

double hermite(int m, double x) {
    if (m < 0) throw std::domain_error("hermite: m must be >= 0");
    if (m == 0) return 1.0;
    double prev = 1.0;  // H_0
    double cur = x;     // H_1
    for (int j = 1; j < m; ++j) {
        const double next = x * cur - static_cast<double>(j) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace {

void wiener_kernel_table(const GaussianCellRealization& real, int max_mult,
                         std::vector<double>& table) {
    const auto& mu = real.frame->mu();
    const int t = static_cast<int>(mu.size());
    const int stride = max_mult + 1;
    table.assign(static_cast<std::size_t>(t * stride), 0.0);
    for (int i = 0; i < t; ++i) {
        const double var = mu[static_cast<std::size_t>(i)];
        if (var > 0.0) {
            const double sd = std::sqrt(var);
            const double z = real.values[static_cast<std::size_t>(i)] / sd;
            double scale = 1.0;  // mu^{m/2}
            for (int m = 0; m <= max_mult; ++m) {
                table[static_cast<std::size_t>(i * stride + m)] = scale * hermite(m, z);
                scale *= sd;
            }
        } else {
            table[static_cast<std::size_t>(i * stride)] = 1.0;  // m = 0 only
        }
    }
}

}  // namespace

double wiener_integral(const EvalPlan& plan, const GaussianCellRealization& real) {
    if (plan.grid_size != real.frame->grid().size())
        throw std::invalid_argument("wiener_integral: plan grid does not match realization grid");
    if (plan.order == 0) {
        double c = 0.0;
        for (const PatternTerm& t : plan.terms) c += t.coeff;
        return c;
    }
    std::vector<double> table;
    wiener_kernel_table(real, plan.max_mult, table);
    return evaluate_plan(plan, table);
}

double wiener_integral(const CellwiseFunction& f, const GaussianCellRealization& real) {
    if (!(f.grid() == real.frame->grid()))
        throw std::invalid_argument("wiener_integral: integrand grid must equal realization grid");
    return wiener_integral(compile_plan(f), real);
}

double wiener_integral_tensor_power(const StepFunction& g, int k,
                                    const GaussianCellRealization& real) {
    if (!(g.grid == real.frame->grid()))
        throw std::invalid_argument("wiener_integral_tensor_power: grid mismatch");
    if (k < 1) throw std::invalid_argument("wiener_integral_tensor_power: k must be >= 1");
    std::vector<int> support;
    for (int i = 0; i < g.grid.size(); ++i)
        if (g.values[static_cast<std::size_t>(i)] != 0.0) support.push_back(i);

    std::vector<double> table;
    wiener_kernel_table(real, k, table);
    const int stride = k + 1;

    double total = 0.0;
    std::function<void(std::size_t, int, double)> rec = [&](std::size_t pos, int remaining, double acc) {
        if (pos == support.size()) {
            if (remaining == 0) total += acc;
            return;
        }
        const int cell = support[pos];
        double choose = 1.0;
        double gpow = 1.0;
        for (int m = 0; m <= remaining; ++m) {
            rec(pos + 1, remaining - m,
                acc * choose * gpow * table[static_cast<std::size_t>(cell * stride + m)]);
            choose = choose * static_cast<double>(remaining - m) / static_cast<double>(m + 1);
            gpow *= g.values[static_cast<std::size_t>(cell)];
        }
    };
    rec(0, k, 1.0);
    return total;
}

double chaos_series(const std::vector<EvalPlan>& component_plans, int K,
                    const GaussianCellRealization& real) {
    double acc = 0.0;
    for (std::size_t k = 0; k < component_plans.size() && static_cast<int>(k) <= K; ++k)
        acc += wiener_integral(component_plans[k], real);
    return acc;
}

double chaos_series(const ChaosVector& h, int K, const GaussianCellRealization& real) {
    double acc = 0.0;
    for (std::size_t k = 0; k < h.components.size() && static_cast<int>(k) <= K; ++k)
        acc += wiener_integral(h.components[k], real);
    return acc;
}

}  // namespace ewc
