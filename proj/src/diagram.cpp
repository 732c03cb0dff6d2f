#include "ewc/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace ewc {

namespace {

constexpr int kMaxFactorialArg = 20;

std::uint64_t factorial_u64(int k) {
    std::uint64_t f = 1;
    for (int i = 2; i <= k; ++i) f *= static_cast<std::uint64_t>(i);
    return f;
}

std::uint64_t binomial_u64(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    return static_cast<std::uint64_t>(r);
}

void check_lp(int k1, int k2, int l, int p) {
    if (k1 < 0 || k2 < 0) throw std::domain_error("diagram: negative row size");
    if (l < 0 || l > std::min(k1, k2)) throw std::domain_error("diagram: l out of range");
    if (p < 0 || p > l) throw std::domain_error("diagram: p out of range");
}

// All size-m subsets of {0..n-1} in lexicographic order.
void for_each_subset(int n, int m, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> comb(static_cast<std::size_t>(m));
    std::function<void(int, int)> rec = [&](int start, int pos) {
        if (pos == m) {
            fn(comb);
            return;
        }
        for (int v = start; v <= n - (m - pos); ++v) {
            comb[static_cast<std::size_t>(pos)] = v;
            rec(v + 1, pos + 1);
        }
    };
    rec(0, 0);
}

std::vector<Diagram> build_diagrams(int k1, int k2, int l) {
    std::vector<Diagram> out;
    if (l == 0) {
        out.push_back(Diagram{k1, k2, {}});
        return out;
    }
    for_each_subset(k1, l, [&](const std::vector<int>& left) {
        // ordered selections of l distinct right slots, lexicographic
        std::vector<int> right(static_cast<std::size_t>(l));
        std::vector<bool> used(static_cast<std::size_t>(k2), false);
        std::function<void(int)> rec = [&](int pos) {
            if (pos == l) {
                Diagram d{k1, k2, {}};
                d.edges.reserve(static_cast<std::size_t>(l));
                for (int i = 0; i < l; ++i)
                    d.edges.emplace_back(left[static_cast<std::size_t>(i)], right[static_cast<std::size_t>(i)]);
                out.push_back(std::move(d));
                return;
            }
            for (int v = 0; v < k2; ++v) {
                if (used[static_cast<std::size_t>(v)]) continue;
                used[static_cast<std::size_t>(v)] = true;
                right[static_cast<std::size_t>(pos)] = v;
                rec(pos + 1);
                used[static_cast<std::size_t>(v)] = false;
            }
        };
        rec(0);
    });
    return out;
}

std::mutex g_cache_mutex;
std::map<std::tuple<int, int, int>, std::shared_ptr<const std::vector<Diagram>>> g_diagram_cache;
std::map<std::tuple<int, int, int, int>, std::shared_ptr<const std::vector<ColoredDiagram>>>
    g_colored_cache;

}  // namespace

std::uint64_t diagram_count(int k1, int k2, int l) {
    check_lp(k1, k2, l, 0);
    return binomial_u64(k1, l) * binomial_u64(k2, l) * factorial_u64(l);
}

std::uint64_t colored_diagram_count(int k1, int k2, int l, int p) {
    check_lp(k1, k2, l, p);
    return diagram_count(k1, k2, l) * binomial_u64(l, p);
}

std::shared_ptr<const std::vector<Diagram>> enumerate_diagrams(int k1, int k2, int l) {
    check_lp(k1, k2, l, 0);
    const auto key = std::make_tuple(k1, k2, l);
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto it = g_diagram_cache.find(key);
        if (it != g_diagram_cache.end()) return it->second;
    }
    auto built = std::make_shared<const std::vector<Diagram>>(build_diagrams(k1, k2, l));
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    return g_diagram_cache.emplace(key, built).first->second;
}

std::shared_ptr<const std::vector<ColoredDiagram>> enumerate_colored_diagrams(int k1, int k2, int l,
                                                                              int p) {
    check_lp(k1, k2, l, p);
    const auto key = std::make_tuple(k1, k2, l, p);
    {
        std::lock_guard<std::mutex> lock(g_cache_mutex);
        auto it = g_colored_cache.find(key);
        if (it != g_colored_cache.end()) return it->second;
    }
    auto plain = enumerate_diagrams(k1, k2, l);
    std::vector<ColoredDiagram> out;
    for (const Diagram& d : *plain) {
        for_each_subset(l, p, [&](const std::vector<int>& colored) {
            out.push_back(ColoredDiagram{d, colored});
        });
    }
    auto built = std::make_shared<const std::vector<ColoredDiagram>>(std::move(out));
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    return g_colored_cache.emplace(key, built).first->second;
}

namespace {

// Core contraction on a shared grid. `masses` is null for plain contraction;
// when set, colored edges are integrated out against it.
CellwiseFunction contract_on_common_grid(const CellwiseFunction& f, const CellwiseFunction& g,
                                         const ColoredDiagram& cd, const std::vector<double>* masses) {
    const int k1 = f.order();
    const int k2 = g.order();
    const Diagram& d = cd.diagram;
    if (d.k1 != k1 || d.k2 != k2)
        throw std::invalid_argument("contract: diagram row sizes do not match integrand orders");

    std::vector<bool> right_matched(static_cast<std::size_t>(k2), false);
    for (const auto& [a, b] : d.edges) {
        if (a < 0 || a >= k1 || b < 0 || b >= k2) throw std::invalid_argument("contract: edge out of range");
        right_matched[static_cast<std::size_t>(b)] = true;
    }
    std::vector<bool> left_colored(static_cast<std::size_t>(k1), false);
    for (int e : cd.colored)
        left_colored[static_cast<std::size_t>(d.edges.at(static_cast<std::size_t>(e)).first)] = true;

    const int out_order = k1 + k2 - d.l() - (masses ? cd.p() : 0);
    CellwiseFunction out(out_order, f.grid());

    IndexTuple t;
    t.reserve(static_cast<std::size_t>(out_order));
    for (const auto& [tf, vf] : f.coeffs()) {
        for (const auto& [tg, vg] : g.coeffs()) {
            bool ok = true;
            for (const auto& [a, b] : d.edges) {
                if (tf[static_cast<std::size_t>(a)] != tg[static_cast<std::size_t>(b)]) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;  // disjoint cells kill mixed identifications
            double v = vf * vg;
            t.clear();
            for (int j = 0; j < k1; ++j) {
                if (masses && left_colored[static_cast<std::size_t>(j)])
                    v *= (*masses)[static_cast<std::size_t>(tf[static_cast<std::size_t>(j)])];
                else
                    t.push_back(tf[static_cast<std::size_t>(j)]);
            }
            for (int j = 0; j < k2; ++j)
                if (!right_matched[static_cast<std::size_t>(j)]) t.push_back(tg[static_cast<std::size_t>(j)]);
            out.add(t, v);
        }
    }
    return out;
}

struct CommonPair {
    CellwiseFunction f;
    CellwiseFunction g;
};

CommonPair to_common_grid(const CellwiseFunction& f, const CellwiseFunction& g) {
    const GridRefinement r = refine(f.grid(), g.grid());
    return CommonPair{f.on_refined(r.grid, r.map_a), g.on_refined(r.grid, r.map_b)};
}

}  // namespace

CellwiseFunction contract(const CellwiseFunction& f, const CellwiseFunction& g, const Diagram& d) {
    const CommonPair c = to_common_grid(f, g);
    return contract_on_common_grid(c.f, c.g, ColoredDiagram{d, {}}, nullptr);
}

CellwiseFunction contract_integrated(const CellwiseFunction& f, const CellwiseFunction& g,
                                     const ColoredDiagram& cd, const TriangularArraySchedule& sched,
                                     MeasureKind kind, std::int64_t n) {
    const CommonPair c = to_common_grid(f, g);
    const auto masses = cell_masses(c.f.grid(), sched, kind, n);
    return contract_on_common_grid(c.f, c.g, cd, &masses);
}

CellwiseFunction averaged_contraction(const CellwiseFunction& f, const CellwiseFunction& g, int l,
                                      int p, std::int64_t n, const TriangularArraySchedule& sched) {
    const CommonPair c = to_common_grid(f, g);
    const auto masses = cell_masses(c.f.grid(), sched, MeasureKind::Pn, n);
    const auto diagrams = enumerate_colored_diagrams(f.order(), g.order(), l, p);
    CellwiseFunction acc(f.order() + g.order() - l - p, c.f.grid());
    for (const ColoredDiagram& cd : *diagrams) {
        const CellwiseFunction term = contract_on_common_grid(c.f, c.g, cd, &masses);
        for (const auto& [idx, v] : term.coeffs()) acc.add(idx, v);
    }
    acc.scale(1.0 / static_cast<double>(diagrams->size()));
    return acc;
}

std::uint64_t set_partition_count(const std::vector<int>& parts) {
    int k = 0;
    for (int r : parts) {
        if (r < 1) throw std::domain_error("set_partition_count: parts must be >= 1");
        k += r;
    }
    if (k == 0 || k > kMaxFactorialArg)
        throw std::domain_error("set_partition_count: total size out of supported range [1,20]");
    unsigned __int128 num = factorial_u64(k);
    for (int r : parts) num /= factorial_u64(r);
    std::map<int, int> mult;
    for (int r : parts) ++mult[r];
    for (const auto& [size, m] : mult) num /= factorial_u64(m);
    return static_cast<std::uint64_t>(num);
}

namespace {

// Sum over unordered block-size multisets of k into s parts, all parts >= 2
// (parts equal to 1 carry weight zero), of (r_1-1)...(r_s-1) * B(r_1,...,r_s).
// B already counts unordered set partitions, so each size multiset enters
// once: summing ordered tuples instead would overcount by the number of
// distinct orderings, which breaks the exact mean formula from k = 5 on (the
// single-cell binomial factorial-moment identity pins the correct reading).
// Enumerated as non-increasing part sequences; exact integer arithmetic.
__int128 block_size_sum(int k, int s) {
    __int128 total = 0;
    std::vector<int> parts(static_cast<std::size_t>(s));
    std::function<void(int, int, int)> rec = [&](int pos, int remaining, int max_part) {
        if (pos == s) {
            if (remaining != 0) return;
            unsigned __int128 w = 1;
            for (int r : parts) w *= static_cast<unsigned>(r - 1);
            total += static_cast<__int128>(w * set_partition_count(parts));
            return;
        }
        const int slots_left = s - pos - 1;
        for (int r = 2; r <= std::min(max_part, remaining - 2 * slots_left); ++r) {
            parts[static_cast<std::size_t>(pos)] = r;
            rec(pos + 1, remaining - r, r);
        }
    };
    rec(0, k, k);
    return total;
}

}  // namespace

double b_coeff(std::int64_t n, int k) {
    if (n < 1) throw std::domain_error("b_coeff: n must be >= 1");
    if (k < 0) throw std::domain_error("b_coeff: k must be >= 0");
    if (k == 0) return 1.0;
    if (k > kMaxFactorialArg)
        throw std::domain_error("b_coeff: k > 20 exceeds exact accumulation range");
    long double total = 0.0L;
    for (int s = 1; 2 * s <= k; ++s) {
        const __int128 inner = block_size_sum(k, s);
        if (inner == 0) continue;
        long double falling = 1.0L;  // C(n,s) * s! = n (n-1) ... (n-s+1)
        for (int i = 0; i < s; ++i) falling *= static_cast<long double>(n - i);
        const long double sign = ((k - s) % 2 == 0) ? 1.0L : -1.0L;
        total += sign * falling * static_cast<long double>(inner);
    }
    const long double denom =
        static_cast<long double>(factorial_u64(k)) * std::pow(static_cast<long double>(n), 0.5L * k);
    return static_cast<double>(total / denom);
}

double exact_mean(const CellwiseFunction& f, std::int64_t n, const TriangularArraySchedule& sched) {
    const int k = f.order();
    const double ratio = static_cast<double>(n) / sched.a_n(n);
    return factorial(k) * b_coeff(n, k) * std::pow(ratio, 0.5 * k) *
           product_integral(f, sched, MeasureKind::Pn, n);
}

double f_bilinear(const CellwiseFunction& f, const CellwiseFunction& g, int l, std::int64_t n,
                  const TriangularArraySchedule& sched, int p) {
    const int k1 = f.order();
    const int k2 = g.order();
    if (p < 0) p = l;
    check_lp(k1, k2, l, p);
    const CellwiseFunction avg = averaged_contraction(f, g, l, p, n, sched);
    const double ratio = static_cast<double>(n) / sched.a_n(n);
    return std::pow(ratio, 0.5 * (k1 + k2)) * product_integral(avg, sched, MeasureKind::Pn, n);
}

std::vector<ProductExpansionTerm> product_expansion(const CellwiseFunction& f,
                                                    const CellwiseFunction& g, std::int64_t n,
                                                    const TriangularArraySchedule& sched) {
    const int k1 = f.order();
    const int k2 = g.order();
    const CommonPair c = to_common_grid(f, g);
    const auto pn = cell_masses(c.f.grid(), sched, MeasureKind::Pn, n);
    const double ratio = static_cast<double>(n) / sched.a_n(n);

    std::vector<ProductExpansionTerm> terms;
    for (int l = 0; l <= std::min(k1, k2); ++l) {
        for (int p = 0; p <= l; ++p) {
            const auto diagrams = enumerate_colored_diagrams(k1, k2, l, p);
            CellwiseFunction acc(k1 + k2 - l - p, c.f.grid());
            for (const ColoredDiagram& cd : *diagrams) {
                const CellwiseFunction term = contract_on_common_grid(c.f, c.g, cd, &pn);
                for (const auto& [idx, v] : term.coeffs()) acc.add(idx, v);
            }
            acc.scale(1.0 / static_cast<double>(diagrams->size()));
            const double coeff = std::pow(ratio, 0.5 * (l + p)) *
                                 static_cast<double>(diagrams->size()) *
                                 std::pow(static_cast<double>(n), -0.5 * (l - p));
            terms.push_back(ProductExpansionTerm{l, p, diagrams->size(), coeff, std::move(acc)});
        }
    }
    return terms;
}

double exact_cross_moment(const CellwiseFunction& f, const CellwiseFunction& g, std::int64_t n,
                          const TriangularArraySchedule& sched) {
    double acc = 0.0;
    for (const ProductExpansionTerm& t : product_expansion(f, g, n, sched)) {
        acc += t.coefficient * exact_mean(t.integrand, n, sched);
    }
    return acc;
}

}  // namespace ewc
