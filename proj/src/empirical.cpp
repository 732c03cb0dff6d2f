#include "ewc/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace ewc {

CellFrame::CellFrame(TriangularArraySchedule sched, Grid grid, std::int64_t n)
    : sched_(std::move(sched)), grid_(std::move(grid)), n_(n) {
    if (n_ < 0) throw std::domain_error("CellFrame: n must be >= 0");
    const std::int64_t level = std::max<std::int64_t>(n_, 1);
    a_n_ = sched_.a_n(level);
    window_end_ = sched_.window_end(level);
    pn_.resize(static_cast<std::size_t>(grid_.size()));
    double total = 0.0;
    for (int i = 0; i < grid_.size(); ++i) {
        pn_[static_cast<std::size_t>(i)] = sched_.p_n(grid_.cell(i), level);
        total += pn_[static_cast<std::size_t>(i)];
    }
    if (total > 1.0 + 1e-12)
        throw std::runtime_error("CellFrame: grid cell probabilities exceed 1; schedule and grid are inconsistent");
    pn_rest_ = std::max(0.0, 1.0 - total);
}

CellCounts draw_counts(std::shared_ptr<const CellFrame> frame, SeedInfo seed) {
    Engine eng = make_engine(seed.stream, seed.replicate);
    return draw_counts(std::move(frame), eng, seed);
}

CellCounts draw_counts(std::shared_ptr<const CellFrame> frame, Engine& eng, SeedInfo seed) {
    const int t = frame->grid().size();
    CellCounts cc;
    cc.frame = frame;
    cc.seed = seed;
    cc.counts.assign(static_cast<std::size_t>(t), 0);
    std::int64_t remaining = frame->n();
    double prob_remaining = 1.0;
    // sequential binomial chain over cells, remainder goes to "rest of E_n"
    for (int i = 0; i < t && remaining > 0; ++i) {
        const double p = frame->pn()[static_cast<std::size_t>(i)];
        double cond = prob_remaining > 0.0 ? p / prob_remaining : 0.0;
        cond = std::clamp(cond, 0.0, 1.0);
        std::int64_t draw = 0;
        if (cond >= 1.0) {
            draw = remaining;
        } else if (cond > 0.0) {
            std::binomial_distribution<std::int64_t> dist(remaining, cond);
            draw = dist(eng);
        }
        cc.counts[static_cast<std::size_t>(i)] = draw;
        remaining -= draw;
        prob_remaining -= p;
    }
    cc.rest = remaining;
    return cc;
}

PointSample draw_points(std::shared_ptr<const CellFrame> frame, SeedInfo seed) {
    Engine eng = make_engine(seed.stream, seed.replicate);
    PointSample s;
    s.frame = frame;
    s.seed = seed;
    const std::int64_t n = frame->n();
    const double upper = frame->window_end();
    const double total = frame->sched().control().mass_below(upper);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    s.points.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = unif(eng);
        s.points.push_back(frame->sched().control().quantile_below(u * total, upper));
    }
    return s;
}

CellCounts counts_from_points(const PointSample& sample) {
    CellCounts cc;
    cc.frame = sample.frame;
    cc.seed = sample.seed;
    cc.counts.assign(static_cast<std::size_t>(sample.frame->grid().size()), 0);
    cc.rest = 0;
    for (double x : sample.points) {
        const int i = sample.frame->grid().locate(x);
        if (i >= 0)
            ++cc.counts[static_cast<std::size_t>(i)];
        else
            ++cc.rest;
    }
    return cc;
}

double w_n_cell(const CellCounts& counts, int cell_index) {
    const CellFrame& fr = *counts.frame;
    const double np = static_cast<double>(fr.n()) * fr.pn()[static_cast<std::size_t>(cell_index)];
    return (static_cast<double>(counts.counts[static_cast<std::size_t>(cell_index)]) - np) /
           std::sqrt(fr.a_n());
}

double w_n(const CellCounts& counts, std::span<const Interval> cells) {
    const CellFrame& fr = *counts.frame;
    std::int64_t N = 0;
    double p = 0.0;
    for (const Interval& b : cells) {
        // must tile exactly with grid cells
        double covered = 0.0;
        for (int i = 0; i < fr.grid().size(); ++i) {
            const Interval& c = fr.grid().cell(i);
            if (c.lo >= b.lo - 1e-12 && c.hi <= b.hi + 1e-12) {
                N += counts.counts[static_cast<std::size_t>(i)];
                p += fr.pn()[static_cast<std::size_t>(i)];
                covered += std::max(0.0, std::min(c.hi, fr.window_end()) - c.lo);
            }
        }
        const double clipped = std::max(0.0, std::min(b.hi, fr.window_end()) - b.lo);
        if (std::abs(covered - clipped) > 1e-9 * (1.0 + clipped))
            throw std::invalid_argument("w_n: requested set is not a union of grid cells");
    }
    return (static_cast<double>(N) - static_cast<double>(fr.n()) * p) / std::sqrt(fr.a_n());
}

namespace {

// kernel(A, m) = a^{-m/2} sum_d C(m,d) (N)_d (-nP)^{m-d}
void empirical_kernel_table(const CellCounts& counts, int max_mult, std::vector<double>& table) {
    const CellFrame& fr = *counts.frame;
    const int t = fr.grid().size();
    const int stride = max_mult + 1;
    if (max_mult > kMaxMultiplicity)
        throw std::runtime_error("empirical_integral: cell multiplicity exceeds supported bound 20");
    table.assign(static_cast<std::size_t>(t * stride), 0.0);
    const long double inv_sqrt_a = 1.0L / std::sqrt(static_cast<long double>(fr.a_n()));
    for (int i = 0; i < t; ++i) {
        const long double N = static_cast<long double>(counts.counts[static_cast<std::size_t>(i)]);
        const long double np = static_cast<long double>(fr.n()) *
                               static_cast<long double>(fr.pn()[static_cast<std::size_t>(i)]);
        long double scale = 1.0L;  // a^{-m/2}
        for (int m = 0; m <= max_mult; ++m) {
            long double sum = 0.0L;
            long double binom = 1.0L;  // C(m, d)
            long double falling = 1.0L;
            for (int d = 0; d <= m; ++d) {
                long double pw = 1.0L;
                for (int j = 0; j < m - d; ++j) pw *= -np;
                sum += binom * falling * pw;
                binom = binom * static_cast<long double>(m - d) / static_cast<long double>(d + 1);
                falling *= (N - static_cast<long double>(d));
            }
            table[static_cast<std::size_t>(i * stride + m)] = static_cast<double>(scale * sum);
            scale *= inv_sqrt_a;
        }
    }
}

}  // namespace

double empirical_integral(const EvalPlan& plan, const CellCounts& counts) {
    if (plan.grid_size != counts.frame->grid().size())
        throw std::invalid_argument("empirical_integral: plan grid does not match counts grid");
    if (plan.order == 0) {
        double c = 0.0;
        for (const PatternTerm& t : plan.terms) c += t.coeff;
        return c;
    }
    std::vector<double> table;
    empirical_kernel_table(counts, plan.max_mult, table);
    return evaluate_plan(plan, table);
}

double empirical_integral(const CellwiseFunction& f, const CellCounts& counts) {
    if (!(f.grid() == counts.frame->grid())) {
        // re-express f on the counts grid when it is a refinement
        const GridRefinement r = refine(f.grid(), counts.frame->grid());
        if (!(r.grid == counts.frame->grid()))
            throw std::invalid_argument("empirical_integral: integrand grid is not aligned with counts grid");
        return empirical_integral(compile_plan(f.on_refined(r.grid, r.map_a)), counts);
    }
    return empirical_integral(compile_plan(f), counts);
}

double empirical_integral_bruteforce(const CellwiseFunction& f, const PointSample& sample) {
    const CellFrame& fr = *sample.frame;
    const int k = f.order();
    const std::int64_t n = fr.n();
    if (std::pow(static_cast<double>(n) + 1.0, k) > 1e7)
        throw std::runtime_error("empirical_integral_bruteforce: (n+1)^k exceeds budget");
    if (k == 0) return f.at({});

    // Integrate out a subset of slots against P_n, leaving a cellwise function
    // of the atom slots; then sum over injective atom assignments.
    const auto pn = cell_masses(f.grid(), fr.sched(), MeasureKind::Pn, fr.n() > 0 ? fr.n() : 1);
    std::vector<int> point_cell(sample.points.size());
    for (std::size_t i = 0; i < sample.points.size(); ++i)
        point_cell[i] = f.grid().locate(sample.points[i]);

    double total = 0.0;
    const double inv_sqrt_a_k = std::pow(fr.a_n(), -0.5 * k);

    // subsets D of slots taking atoms
    for (int mask = 0; mask < (1 << k); ++mask) {
        std::vector<int> atom_slots;
        for (int j = 0; j < k; ++j)
            if (mask & (1 << j)) atom_slots.push_back(j);
        const int d = static_cast<int>(atom_slots.size());

        // g_D: f with non-atom slots integrated against P_n
        std::map<IndexTuple, double> gD;
        for (const auto& [idx, v] : f.coeffs()) {
            double w = v;
            IndexTuple key;
            key.reserve(static_cast<std::size_t>(d));
            for (int j = 0; j < k; ++j) {
                if (mask & (1 << j))
                    key.push_back(idx[static_cast<std::size_t>(j)]);
                else
                    w *= pn[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
            }
            gD[key] += w;
        }

        double sign_n = 1.0;  // (-n)^{k-d}
        for (int j = 0; j < k - d; ++j) sign_n *= -static_cast<double>(n);

        // sum over injective assignments of atoms to the d slots
        double subset_sum = 0.0;
        std::vector<bool> used(static_cast<std::size_t>(n), false);
        IndexTuple key(static_cast<std::size_t>(d));
        std::function<void(int)> rec = [&](int pos) {
            if (pos == d) {
                auto it = gD.find(key);
                if (it != gD.end()) subset_sum += it->second;
                return;
            }
            for (std::int64_t a = 0; a < n; ++a) {
                if (used[static_cast<std::size_t>(a)]) continue;
                const int cell = point_cell[static_cast<std::size_t>(a)];
                if (cell < 0) continue;  // point off-grid: integrand vanishes there
                used[static_cast<std::size_t>(a)] = true;
                key[static_cast<std::size_t>(pos)] = cell;
                rec(pos + 1);
                used[static_cast<std::size_t>(a)] = false;
            }
        };
        rec(0);
        total += sign_n * subset_sum;
    }
    return inv_sqrt_a_k * total;
}

double empirical_integral_tensor_power(const StepFunction& g, int k, const CellCounts& counts) {
    if (!(g.grid == counts.frame->grid()))
        throw std::invalid_argument("empirical_integral_tensor_power: grid mismatch");
    if (k < 1) throw std::invalid_argument("empirical_integral_tensor_power: k must be >= 1");
    std::vector<int> support;
    for (int i = 0; i < g.grid.size(); ++i)
        if (g.values[static_cast<std::size_t>(i)] != 0.0) support.push_back(i);

    std::vector<double> table;
    empirical_kernel_table(counts, k, table);
    const int stride = k + 1;

    // sum over occupancy vectors (m_i) of the support with sum k:
    // multinomial(k; m) * prod g_i^{m_i} * prod kernel(A_i, m_i)
    double total = 0.0;
    std::function<void(std::size_t, int, double)> rec = [&](std::size_t pos, int remaining, double acc) {
        if (pos == support.size()) {
            if (remaining == 0) total += acc;
            return;
        }
        const int cell = support[pos];
        double choose = 1.0;  // C(remaining, m); the product over cells is the multinomial
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

double truncated_chaos(const std::vector<EvalPlan>& component_plans, int K, const CellCounts& counts) {
    double acc = 0.0;
    for (std::size_t k = 0; k < component_plans.size() && static_cast<int>(k) <= K; ++k)
        acc += empirical_integral(component_plans[k], counts);
    return acc;
}

double truncated_chaos(const ChaosVector& h, int K, const CellCounts& counts) {
    double acc = 0.0;
    for (std::size_t k = 0; k < h.components.size() && static_cast<int>(k) <= K; ++k)
        acc += empirical_integral(h.components[k], counts);
    return acc;
}

int k_schedule(std::int64_t n, double c, double eps, const TriangularArraySchedule& sched,
               bool* warned) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw std::domain_error("k_schedule: need 0 < eps < 1");
    if (!(c > 0.0)) throw std::domain_error("k_schedule: need c > 0");
    if (warned) *warned = false;
    const double ratio = static_cast<double>(n) / sched.a_n(n);
    if (ratio <= 1.0) {
        if (warned) *warned = true;
        return 0;
    }
    const double K = c * std::pow(std::log(ratio), 1.0 - eps);
    return K < 0.0 ? 0 : static_cast<int>(std::floor(K));
}

}  // namespace ewc
