#include "ewc/integrand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ewc {

std::vector<double> cell_masses(const Grid& grid, const TriangularArraySchedule& sched,
                                MeasureKind kind, std::int64_t n) {
    std::vector<double> m(static_cast<std::size_t>(grid.size()));
    for (int i = 0; i < grid.size(); ++i) {
        const Interval& c = grid.cell(i);
        switch (kind) {
            case MeasureKind::Mu: m[static_cast<std::size_t>(i)] = sched.mu_mass(c); break;
            case MeasureKind::MuN: m[static_cast<std::size_t>(i)] = sched.mu_n_mass(c, n); break;
            case MeasureKind::Pn: m[static_cast<std::size_t>(i)] = sched.p_n(c, n); break;
        }
    }
    return m;
}

CellwiseFunction::CellwiseFunction(int order, Grid grid) : order_(order), grid_(std::move(grid)) {
    if (order_ < 0) throw std::invalid_argument("CellwiseFunction: order must be >= 0");
}

CellwiseFunction CellwiseFunction::constant(double value) {
    CellwiseFunction f(0, Grid({{0.0, 1.0}}));
    f.set({}, value);
    return f;
}

CellwiseFunction CellwiseFunction::product_indicator(const Grid& grid,
                                                     const std::vector<Interval>& factors,
                                                     double scale) {
    const int k = static_cast<int>(factors.size());
    CellwiseFunction f(k, grid);
    // per-slot admissible cells
    std::vector<std::vector<int>> slots(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
        const Interval& fac = factors[static_cast<std::size_t>(j)];
        double covered = 0.0;
        for (int i = 0; i < grid.size(); ++i) {
            const Interval& c = grid.cell(i);
            if (c.lo >= fac.lo - 1e-12 && c.hi <= fac.hi + 1e-12) {
                slots[static_cast<std::size_t>(j)].push_back(i);
                covered += c.length();
            }
        }
        if (std::abs(covered - fac.length()) > 1e-9 * (1.0 + fac.length()))
            throw std::invalid_argument("product_indicator: factor interval is not a union of grid cells");
    }
    IndexTuple idx(static_cast<std::size_t>(k));
    // cartesian product over admissible cells
    std::vector<std::size_t> pos(static_cast<std::size_t>(k), 0);
    if (k == 0) {
        f.set({}, scale);
        return f;
    }
    while (true) {
        for (int j = 0; j < k; ++j)
            idx[static_cast<std::size_t>(j)] = slots[static_cast<std::size_t>(j)][pos[static_cast<std::size_t>(j)]];
        f.set(idx, scale);
        int j = k - 1;
        while (j >= 0) {
            if (++pos[static_cast<std::size_t>(j)] < slots[static_cast<std::size_t>(j)].size()) break;
            pos[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }
    return f;
}

void CellwiseFunction::set(const IndexTuple& idx, double value) {
    if (static_cast<int>(idx.size()) != order_)
        throw std::invalid_argument("CellwiseFunction::set: tuple length != order");
    for (int i : idx)
        if (i < 0 || i >= grid_.size()) throw std::invalid_argument("CellwiseFunction::set: cell index out of range");
    if (value == 0.0)
        coeffs_.erase(idx);
    else
        coeffs_[idx] = value;
}

void CellwiseFunction::add(const IndexTuple& idx, double value) {
    if (static_cast<int>(idx.size()) != order_)
        throw std::invalid_argument("CellwiseFunction::add: tuple length != order");
    if (value == 0.0) return;
    for (int i : idx)
        if (i < 0 || i >= grid_.size()) throw std::invalid_argument("CellwiseFunction::add: cell index out of range");
    coeffs_[idx] += value;
}

double CellwiseFunction::at(const IndexTuple& idx) const {
    auto it = coeffs_.find(idx);
    return it == coeffs_.end() ? 0.0 : it->second;
}

bool CellwiseFunction::vanishes_on_repeats() const {
    for (const auto& [idx, v] : coeffs_) {
        if (v == 0.0) continue;
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = a + 1; b < idx.size(); ++b)
                if (idx[a] == idx[b]) return false;
    }
    return true;
}

CellwiseFunction CellwiseFunction::on_refined(const Grid& refined,
                                              const std::vector<std::vector<int>>& map) const {
    CellwiseFunction out(order_, refined);
    if (order_ == 0) {
        for (const auto& [idx, v] : coeffs_) out.set(idx, v);
        return out;
    }
    IndexTuple t(static_cast<std::size_t>(order_));
    for (const auto& [idx, v] : coeffs_) {
        // cartesian product of the refined tilings of each slot's cell
        std::vector<std::size_t> pos(idx.size(), 0);
        while (true) {
            for (std::size_t j = 0; j < idx.size(); ++j)
                t[j] = map[static_cast<std::size_t>(idx[j])][pos[j]];
            out.add(t, v);
            std::size_t j = idx.size();
            while (j > 0) {
                --j;
                if (++pos[j] < map[static_cast<std::size_t>(idx[j])].size()) break;
                pos[j] = 0;
                if (j == 0) { pos.clear(); break; }
            }
            if (pos.empty()) break;
        }
    }
    return out;
}

CellwiseFunction& CellwiseFunction::scale(double s) {
    if (s == 0.0) {
        coeffs_.clear();
        return *this;
    }
    for (auto& [idx, v] : coeffs_) v *= s;
    return *this;
}

StepFunction::StepFunction(Grid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != static_cast<std::size_t>(grid.size()))
        throw std::invalid_argument("StepFunction: one value per cell required");
}

double StepFunction::l2_norm_sq(const TriangularArraySchedule& sched, MeasureKind kind,
                                std::int64_t n) const {
    const auto m = cell_masses(grid, sched, kind, n);
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * values[i] * m[i];
    return s;
}

TensorPowerFunction::TensorPowerFunction(StepFunction b, int k) : base(std::move(b)), power(k) {
    if (k < 1) throw std::invalid_argument("TensorPowerFunction: power must be >= 1");
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= static_cast<double>(i);
    return f;
}

CellwiseFunction symmetrize(const CellwiseFunction& f, std::size_t budget) {
    const int k = f.order();
    if (k <= 1) return f;
    double kfact = factorial(k);
    if (kfact * static_cast<double>(f.nonzeros()) > static_cast<double>(budget))
        throw std::runtime_error("symmetrize: permutation expansion exceeds budget");
    CellwiseFunction out(k, f.grid());
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    const double inv = 1.0 / kfact;
    IndexTuple t(static_cast<std::size_t>(k));
    do {
        for (const auto& [idx, v] : f.coeffs()) {
            for (int j = 0; j < k; ++j)
                t[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
            out.add(t, v * inv);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

CellwiseFunction tensor(const CellwiseFunction& f, const CellwiseFunction& g, std::size_t budget) {
    const GridRefinement r = refine(f.grid(), g.grid());
    const CellwiseFunction fr = f.on_refined(r.grid, r.map_a);
    const CellwiseFunction gr = g.on_refined(r.grid, r.map_b);
    if (fr.nonzeros() * std::max<std::size_t>(gr.nonzeros(), 1) > budget)
        throw std::runtime_error("tensor: coefficient blowup exceeds budget");
    CellwiseFunction out(fr.order() + gr.order(), r.grid);
    for (const auto& [ia, va] : fr.coeffs()) {
        for (const auto& [ib, vb] : gr.coeffs()) {
            IndexTuple t;
            t.reserve(ia.size() + ib.size());
            t.insert(t.end(), ia.begin(), ia.end());
            t.insert(t.end(), ib.begin(), ib.end());
            out.add(t, va * vb);
        }
    }
    return out;
}

double l2_inner(const CellwiseFunction& f, const CellwiseFunction& g,
                const TriangularArraySchedule& sched, MeasureKind kind, std::int64_t n) {
    if (f.order() != g.order()) throw std::invalid_argument("l2_inner: order mismatch");
    const GridRefinement r = refine(f.grid(), g.grid());
    const CellwiseFunction fr = f.on_refined(r.grid, r.map_a);
    const CellwiseFunction gr = g.on_refined(r.grid, r.map_b);
    const auto mass = cell_masses(r.grid, sched, kind, n);
    const auto& small = fr.nonzeros() <= gr.nonzeros() ? fr : gr;
    const auto& large = fr.nonzeros() <= gr.nonzeros() ? gr : fr;
    double acc = 0.0;
    for (const auto& [idx, v] : small.coeffs()) {
        const double w = large.at(idx);
        if (w == 0.0) continue;
        double prod = v * w;
        for (int i : idx) prod *= mass[static_cast<std::size_t>(i)];
        acc += prod;
    }
    return acc;
}

double product_integral(const CellwiseFunction& f, const TriangularArraySchedule& sched,
                        MeasureKind kind, std::int64_t n) {
    const auto mass = cell_masses(f.grid(), sched, kind, n);
    double acc = 0.0;
    for (const auto& [idx, v] : f.coeffs()) {
        double prod = v;
        for (int i : idx) prod *= mass[static_cast<std::size_t>(i)];
        acc += prod;
    }
    return acc;
}

CellwiseFunction expand_tensor_power(const StepFunction& g, int k, std::size_t budget) {
    if (k < 1) throw std::invalid_argument("expand_tensor_power: k must be >= 1");
    const std::size_t t = static_cast<std::size_t>(g.grid.size());
    double count = 1.0;
    std::vector<int> support;
    for (int i = 0; i < g.grid.size(); ++i)
        if (g.values[static_cast<std::size_t>(i)] != 0.0) support.push_back(i);
    for (int j = 0; j < k; ++j) count *= static_cast<double>(support.size());
    if (count > static_cast<double>(budget))
        throw std::runtime_error(
            "expand_tensor_power: t^k exceeds budget; evaluate tensor powers through the "
            "unexpanded fast path instead");
    (void)t;
    CellwiseFunction out(k, g.grid);
    IndexTuple idx(static_cast<std::size_t>(k));
    std::vector<std::size_t> pos(static_cast<std::size_t>(k), 0);
    if (support.empty()) return out;
    while (true) {
        double v = 1.0;
        for (int j = 0; j < k; ++j) {
            idx[static_cast<std::size_t>(j)] = support[pos[static_cast<std::size_t>(j)]];
            v *= g.values[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])];
        }
        out.set(idx, v);
        int j = k - 1;
        while (j >= 0) {
            if (++pos[static_cast<std::size_t>(j)] < support.size()) break;
            pos[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }
    return out;
}

ChaosVector::ChaosVector(std::vector<CellwiseFunction> comps) : components(std::move(comps)) {
    for (std::size_t k = 0; k < components.size(); ++k) {
        if (components[k].order() != static_cast<int>(k))
            throw std::invalid_argument("ChaosVector: component k must have order k");
    }
}

double h_norm(const ChaosVector& h, const TriangularArraySchedule& sched) {
    double acc = 0.0;
    for (std::size_t k = 0; k < h.components.size(); ++k) {
        const CellwiseFunction sym = symmetrize(h.components[k]);
        acc += factorial(static_cast<int>(k)) * l2_inner(sym, sym, sched, MeasureKind::Mu);
    }
    return std::sqrt(acc);
}

}  // namespace ewc
