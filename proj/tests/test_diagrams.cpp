#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "ewc/diagram.hpp"
#include "ewc/rng.hpp"

using namespace ewc;

namespace {

const auto kSched = TriangularArraySchedule::standard();

CellwiseFunction indicator(const Grid& grid, const IndexTuple& idx, double v = 1.0) {
    CellwiseFunction f(static_cast<int>(idx.size()), grid);
    f.set(idx, v);
    return f;
}

CellwiseFunction random_cellwise(int order, const Grid& grid, SplitMixStream& rng, double density = 0.5) {
    CellwiseFunction f(order, grid);
    IndexTuple idx(static_cast<std::size_t>(order));
    const int t = grid.size();
    const int total = static_cast<int>(std::pow(t, order));
    for (int code = 0; code < total; ++code) {
        int c = code;
        for (int j = 0; j < order; ++j) {
            idx[static_cast<std::size_t>(j)] = c % t;
            c /= t;
        }
        if (rng.next_unit() < density) f.set(idx, 2.0 * rng.next_unit() - 1.0);
    }
    if (f.nonzeros() == 0) f.set(IndexTuple(static_cast<std::size_t>(order), 0), 1.0);
    return f;
}

double norm(const CellwiseFunction& f) {
    return std::sqrt(l2_inner(f, f, kSched, MeasureKind::Mu));
}

}  // namespace

TEST_CASE("diagram enumeration counts match closed forms") {
    CHECK(enumerate_diagrams(2, 2, 1)->size() == 4);
    CHECK(enumerate_diagrams(3, 2, 2)->size() == 6);
    CHECK(enumerate_diagrams(4, 4, 0)->size() == 1);
    CHECK(enumerate_colored_diagrams(3, 3, 0, 0)->size() == 1);

    for (int k1 = 0; k1 <= 5; ++k1) {
        for (int k2 = 0; k2 <= 5; ++k2) {
            for (int l = 0; l <= std::min(k1, k2); ++l) {
                const auto plain = enumerate_diagrams(k1, k2, l);
                CHECK(plain->size() == diagram_count(k1, k2, l));
                // duplicate-free
                std::set<std::vector<std::pair<int, int>>> seen;
                for (const Diagram& d : *plain) seen.insert(d.edges);
                CHECK(seen.size() == plain->size());
                for (int p = 0; p <= l; ++p)
                    CHECK(enumerate_colored_diagrams(k1, k2, l, p)->size() ==
                          colored_diagram_count(k1, k2, l, p));
            }
        }
    }
    CHECK_THROWS_AS(enumerate_diagrams(2, 2, 3), std::domain_error);
    CHECK_THROWS_AS(enumerate_colored_diagrams(2, 2, 1, 2), std::domain_error);
}

TEST_CASE("contraction follows the worked identification pattern") {
    Grid g({{0, 1}, {1, 2}});
    // f = 1_{A x B} (order 2), g = 1_A, edge pairing slot 0 of f with slot 0 of g
    const auto f = indicator(g, {0, 1});
    const auto ga = indicator(g, {0});
    const Diagram d{2, 1, {{0, 0}}};
    const auto c = contract(f, ga, d);
    CHECK(c.order() == 2);
    CHECK(c.at({0, 1}) == doctest::Approx(1.0));
    CHECK(c.nonzeros() == 1);

    // identified slots over disjoint cells vanish
    const auto zero = contract(indicator(g, {0}), indicator(g, {1}), Diagram{1, 1, {{0, 0}}});
    CHECK(zero.nonzeros() == 0);

    // empty edge set reduces to the tensor product
    const auto t = contract(indicator(g, {0}), indicator(g, {1}), Diagram{1, 1, {}});
    CHECK(t.at({0, 1}) == doctest::Approx(1.0));
}

TEST_CASE("integrated contraction") {
    Grid g({{0, 1}});
    const auto f = indicator(g, {0});
    const ColoredDiagram cd{Diagram{1, 1, {{0, 0}}}, {0}};
    const auto c100 = contract_integrated(f, f, cd, kSched, MeasureKind::Pn, 100);
    CHECK(c100.order() == 0);
    CHECK(c100.at({}) == doctest::Approx(0.1));

    const auto cmu = contract_integrated(f, f, cd, kSched, MeasureKind::Mu);
    CHECK(cmu.at({}) == doctest::Approx(1.0));

    // p = 0 coincides with the plain contraction
    const ColoredDiagram plain{Diagram{1, 1, {{0, 0}}}, {}};
    const auto c0 = contract_integrated(f, f, plain, kSched, MeasureKind::Pn, 100);
    const auto c0b = contract(f, f, plain.diagram);
    CHECK(c0.order() == c0b.order());
    CHECK(c0.at({0}) == doctest::Approx(c0b.at({0})));
}

TEST_CASE("averaged contraction") {
    Grid g({{0, 1}});
    const auto f = indicator(g, {0});

    const auto t00 = averaged_contraction(f, f, 0, 0, 100, kSched);
    CHECK(t00.order() == 2);
    CHECK(t00.at({0, 0}) == doctest::Approx(1.0));  // f tensor f

    const auto t10 = averaged_contraction(f, f, 1, 0, 100, kSched);
    CHECK(t10.order() == 1);
    CHECK(t10.at({0}) == doctest::Approx(1.0));  // single diagram, f*f = f

    const auto t11 = averaged_contraction(f, f, 1, 1, 100, kSched);
    CHECK(t11.order() == 0);
    CHECK(t11.at({}) == doctest::Approx(0.1));
}

TEST_CASE("contraction norm bound on random integrands") {
    SplitMixStream rng(77);
    Grid g({{0, 1}, {1, 2}, {2, 4}});
    for (int k1 = 1; k1 <= 3; ++k1) {
        for (int k2 = 1; k2 <= 3; ++k2) {
            const auto f = random_cellwise(k1, g, rng);
            const auto h = random_cellwise(k2, g, rng);
            for (int l = 0; l <= std::min(k1, k2); ++l) {
                for (const Diagram& d : *enumerate_diagrams(k1, k2, l)) {
                    CHECK(norm(contract(f, h, d)) <= norm(f) * norm(h) * (1 + 1e-10) + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("set partition counts") {
    CHECK(set_partition_count({2, 1}) == 3);
    CHECK(set_partition_count({5}) == 1);
    CHECK(set_partition_count({2, 2}) == 3);
    CHECK(set_partition_count({3, 2, 2}) == 105);  // 7!/(3! 2! 2! 2!) by direct count
    CHECK_THROWS_AS(set_partition_count({0, 2}), std::domain_error);
    CHECK_THROWS_AS(set_partition_count(std::vector<int>(11, 2)), std::domain_error);
}

TEST_CASE("b coefficients") {
    CHECK(b_coeff(50, 0) == 1.0);
    for (std::int64_t n : {1, 10, 100, 1000000}) CHECK(b_coeff(n, 2) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(b_coeff(100, 3) == doctest::Approx(1.0 / 30.0).epsilon(1e-14));
    CHECK(b_coeff(100, 1) == 0.0);
    CHECK_THROWS_AS(b_coeff(100, 21), std::domain_error);

    // growth surrogate for the k^{-k/2} envelope
    for (std::int64_t n = 10; n <= 1000000; n *= 10) {
        for (int k = 0; k <= 10; ++k) {
            CHECK(std::abs(b_coeff(n, k)) * std::pow(static_cast<double>(k), 0.5 * k) <=
                  std::pow(10.0, k));
        }
    }
}

TEST_CASE("b coefficients against the binomial factorial-moment identity") {
    // For a single cell, E I_k(1_{A^k}) computed from binomial factorial
    // moments gives k! B_{n,k} n^{k/2} = sum_d C(k,d) (n)_d (-n)^{k-d},
    // an independent route that never touches compositions or partitions.
    auto rhs = [](std::int64_t n, int k) {
        long double sum = 0.0L;
        long double binom = 1.0L;
        long double falling = 1.0L;
        for (int d = 0; d <= k; ++d) {
            long double pw = 1.0L;
            for (int j = 0; j < k - d; ++j) pw *= -static_cast<long double>(n);
            sum += binom * falling * pw;
            binom = binom * static_cast<long double>(k - d) / static_cast<long double>(d + 1);
            falling *= static_cast<long double>(n - d);
        }
        return static_cast<double>(sum);
    };
    for (std::int64_t n : {5, 17, 100}) {
        const int k_cap = n == 100 ? 7 : (n == 17 ? 10 : 12);
        for (int k = 1; k <= k_cap; ++k) {
            const double lhs = factorial(k) * b_coeff(n, k) * std::pow(static_cast<double>(n), 0.5 * k);
            const double want = rhs(n, k);
            CHECK(lhs == doctest::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("F_l uniform bound") {
    SplitMixStream rng(123);
    Grid g({{0, 1}, {1, 2}, {2, 4}});
    for (int k1 = 1; k1 <= 3; ++k1) {
        for (int k2 = 1; k2 <= 3; ++k2) {
            const auto f = random_cellwise(k1, g, rng);
            const auto h = random_cellwise(k2, g, rng);
            const double bound = norm(f) * norm(h);
            for (int l = 0; l <= std::min(k1, k2); ++l) {
                for (std::int64_t n : {10, 1000, 100000}) {
                    CHECK(std::abs(f_bilinear(f, h, l, n, kSched)) <= bound * (1 + 1e-10) + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("exact mean formula") {
    Grid g({{0, 1}});
    const auto f1 = indicator(g, {0});
    for (std::int64_t n : {4, 100, 10000}) CHECK(exact_mean(f1, n, kSched) == 0.0);

    const auto f2 = indicator(g, {0, 0});
    CHECK(exact_mean(f2, 10000, kSched) == doctest::Approx(-0.01).epsilon(1e-12));
    CHECK(exact_mean(f2, 100, kSched) == doctest::Approx(-0.1).epsilon(1e-12));

    CHECK(exact_mean(CellwiseFunction::constant(3.25), 17, kSched) == doctest::Approx(3.25));
}

TEST_CASE("bilinear form F_l") {
    Grid g({{0, 1}});
    const auto f = indicator(g, {0});
    for (std::int64_t n : {1, 7, 100, 10000}) CHECK(f_bilinear(f, f, 1, n, kSched) == doctest::Approx(1.0));
    CHECK(f_bilinear(f, f, 0, 10000, kSched) == doctest::Approx(0.01).epsilon(1e-12));

    // p-route invariance and symmetrization invariance on random integrands
    SplitMixStream rng(99);
    Grid g3({{0, 1}, {1, 2}, {2, 4}});
    for (int k1 = 1; k1 <= 3; ++k1) {
        for (int k2 = 1; k2 <= 3; ++k2) {
            const auto a = random_cellwise(k1, g3, rng);
            const auto b = random_cellwise(k2, g3, rng);
            for (int l = 0; l <= std::min(k1, k2); ++l) {
                const double full = f_bilinear(a, b, l, 500, kSched, l);
                const double none = f_bilinear(a, b, l, 500, kSched, 0);
                CHECK(full == doctest::Approx(none).epsilon(1e-12));
                const double sym = f_bilinear(symmetrize(a), symmetrize(b), l, 500, kSched);
                CHECK(full == doctest::Approx(sym).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("F_l limits (vanishing and diagonal cases)") {
    Grid g({{0, 1}, {1, 2}});
    const auto f = indicator(g, {0});
    const auto g12 = indicator(g, {0, 1});

    // l < (k1+k2)/2 cases shrink along the grid
    double prev = 1e18;
    for (std::int64_t n : {100, 1000, 10000, 100000}) {
        const double v = std::abs(f_bilinear(f, g12, 1, n, kSched));
        CHECK(v < prev);
        prev = v;
    }

    // l = k1 = k2 converges to <sym f, sym g>: here 1/2 * mu(A) mu(B)
    const auto fs = symmetrize(g12);
    const double target = l2_inner(fs, fs, kSched, MeasureKind::Mu);
    CHECK(target == doctest::Approx(0.5));
    CHECK(f_bilinear(g12, g12, 2, 1000000, kSched) == doctest::Approx(target).epsilon(1e-9));
}

TEST_CASE("exact cross moments against hand-computed covariances") {
    Grid g({{0, 1}, {1, 2}});
    const auto a = indicator(g, {0});
    const auto b = indicator(g, {1});
    // Var W_n([0,1]) = (n/a_n)(P - P^2), Cov of disjoint cells = -(n/a_n) P1 P2
    CHECK(exact_cross_moment(a, a, 10000, kSched) == doctest::Approx(0.99).epsilon(1e-12));
    CHECK(exact_cross_moment(a, b, 10000, kSched) == doctest::Approx(-0.01).epsilon(1e-12));
    // asymptotically orthogonal orders
    const auto ab = indicator(g, {0, 1});
    CHECK(std::abs(exact_cross_moment(a, ab, 1000000, kSched)) < 1e-3);
    CHECK(exact_cross_moment(ab, ab, 1000000, kSched) == doctest::Approx(1.0).epsilon(1e-2));
}
