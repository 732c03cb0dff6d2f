#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ewc/stats.hpp"
#include "ewc/wiener.hpp"

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

}  // namespace

TEST_CASE("hermite recurrence") {
    CHECK(hermite(0, 3.7) == 1.0);
    CHECK(hermite(1, 3.7) == doctest::Approx(3.7));
    CHECK(hermite(2, 0.5) == doctest::Approx(-0.75));
    CHECK(hermite(3, 2.0) == doctest::Approx(2.0));
    CHECK(hermite(4, 1.5) == doctest::Approx(1.5 * 1.5 * 1.5 * 1.5 - 6.0 * 1.5 * 1.5 + 3.0));
}

TEST_CASE("hermite orthogonality by Monte Carlo") {
    const std::int64_t R = 200000;
    Engine eng = make_engine(90210, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j <= 4; ++j) {
        for (int m = j; m <= 4; ++m) {
            KahanSum s;
            Engine e2 = make_engine(90210, static_cast<std::uint64_t>(j * 8 + m));
            std::vector<double> vals(static_cast<std::size_t>(R));
            for (std::int64_t r = 0; r < R; ++r) {
                const double z = normal(e2);
                vals[static_cast<std::size_t>(r)] = hermite(j, z) * hermite(m, z);
            }
            const double target = (j == m) ? factorial(m) : 0.0;
            const auto est = summarize(vals, target);
            CHECK(std::abs(*est.z_score) <= 5.0);
        }
    }
    (void)eng;
}

TEST_CASE("gaussian cell sampling") {
    Grid grid({{0.0, 2.0}, {3.0, 4.0}});
    auto frame = std::make_shared<const GaussianFrame>(kSched, grid);
    CHECK(frame->mu()[0] == doctest::Approx(2.0));

    // deterministic given seed
    const auto a = sample_gaussian_cells(frame, SeedInfo{7, 3});
    const auto b = sample_gaussian_cells(frame, SeedInfo{7, 3});
    CHECK(a.values == b.values);

    // MC variance of W(A) near mu(A); disjoint cells uncorrelated
    const std::int64_t R = 100000;
    std::vector<double> w0(static_cast<std::size_t>(R)), prod(static_cast<std::size_t>(R));
    for (std::int64_t r = 0; r < R; ++r) {
        const auto real = sample_gaussian_cells(frame, SeedInfo{55, static_cast<std::uint64_t>(r)});
        w0[static_cast<std::size_t>(r)] = real.values[0] * real.values[0];
        prod[static_cast<std::size_t>(r)] = real.values[0] * real.values[1];
    }
    CHECK(std::abs(*summarize(w0, 2.0).z_score) <= 5.0);
    CHECK(std::abs(*summarize(prod, 0.0).z_score) <= 5.0);

    // zero-mass cell: identically zero values
    TriangularArraySchedule stepped(ControlMeasure({1.0, 2.0}, {1.0, 0.0, 1.0}), WindowRule::power(0.5));
    auto zframe = std::make_shared<const GaussianFrame>(stepped, Grid({{1.0, 2.0}}));
    const auto z = sample_gaussian_cells(zframe, SeedInfo{1, 1});
    CHECK(z.values[0] == 0.0);
}

TEST_CASE("wiener integral identities") {
    Grid grid({{0.0, 1.0}});
    auto frame = std::make_shared<const GaussianFrame>(kSched, grid);
    auto real = sample_gaussian_cells(frame, SeedInfo{12, 0});

    // k=1: W(A)
    CHECK(wiener_integral(indicator(grid, {0}), real) == doctest::Approx(real.values[0]));

    // 1_{A x A} with mu(A)=1: W(A)^2 - 1
    real.values[0] = 0.5;
    CHECK(wiener_integral(indicator(grid, {0, 0}), real) == doctest::Approx(-0.75));

    // order 0
    CHECK(wiener_integral(CellwiseFunction::constant(4.2), real) == doctest::Approx(4.2));
}

TEST_CASE("simple integrands reduce to the plain product form") {
    SplitMixStream rng(271828);
    Grid grid({{0.0, 1.0}, {1.0, 2.0}, {2.0, 4.5}});
    auto frame = std::make_shared<const GaussianFrame>(kSched, grid);
    for (int k = 1; k <= 3; ++k) {
        // simple: zero out repeated-index tuples
        CellwiseFunction f(k, grid);
        const auto raw = random_cellwise(k, grid, rng, 0.7);
        for (const auto& [idx, v] : raw.coeffs()) {
            bool repeats = false;
            for (std::size_t a = 0; a < idx.size(); ++a)
                for (std::size_t b = a + 1; b < idx.size(); ++b)
                    if (idx[a] == idx[b]) repeats = true;
            if (!repeats) f.set(idx, v);
        }
        if (f.nonzeros() == 0) continue;
        CHECK(f.vanishes_on_repeats());
        for (std::uint64_t r = 0; r < 20; ++r) {
            const auto real = sample_gaussian_cells(frame, SeedInfo{808, r});
            double direct = 0.0;
            for (const auto& [idx, v] : f.coeffs()) {
                double prod = v;
                for (int i : idx) prod *= real.values[static_cast<std::size_t>(i)];
                direct += prod;
            }
            CHECK(wiener_integral(f, real) == doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("symmetrization invariance and isometry") {
    SplitMixStream rng(5);
    Grid grid({{0.0, 1.0}, {1.0, 2.0}});
    auto frame = std::make_shared<const GaussianFrame>(kSched, grid);
    const auto f = random_cellwise(2, grid, rng);
    const auto fs = symmetrize(f);
    for (std::uint64_t r = 0; r < 10; ++r) {
        const auto real = sample_gaussian_cells(frame, SeedInfo{99, r});
        CHECK(wiener_integral(f, real) == doctest::Approx(wiener_integral(fs, real)).epsilon(1e-12));
    }

    // Var I_2(1_{A x B}) = 2! ||sym||^2 = 1 for disjoint unit cells
    const auto ab = indicator(grid, {0, 1});
    const std::int64_t R = 100000;
    std::vector<double> sq(static_cast<std::size_t>(R));
    for (std::int64_t r = 0; r < R; ++r) {
        const auto real = sample_gaussian_cells(frame, SeedInfo{123, static_cast<std::uint64_t>(r)});
        const double v = wiener_integral(ab, real);
        sq[static_cast<std::size_t>(r)] = v * v;
    }
    CHECK(std::abs(*summarize(sq, 1.0).z_score) <= 5.0);

    // second-moment bound: Var I_k(f) = k! ||sym f||^2 <= k! ||f||^2
    const double var_target = 2.0 * l2_inner(fs, fs, kSched, MeasureKind::Mu);
    const double bound = 2.0 * l2_inner(f, f, kSched, MeasureKind::Mu);
    CHECK(var_target <= bound + 1e-12);
    std::vector<double> fsq(static_cast<std::size_t>(R));
    for (std::int64_t r = 0; r < R; ++r) {
        const auto real = sample_gaussian_cells(frame, SeedInfo{321, static_cast<std::uint64_t>(r)});
        const double v = wiener_integral(f, real);
        fsq[static_cast<std::size_t>(r)] = v * v;
    }
    const auto est = summarize(fsq, var_target);
    CHECK(std::abs(*est.z_score) <= 5.0);
    CHECK(est.mean <= bound + 5.0 * est.standard_error);
}

TEST_CASE("isometry across orders (orthogonality)") {
    Grid grid({{0.0, 1.0}, {1.0, 2.0}});
    auto frame = std::make_shared<const GaussianFrame>(kSched, grid);
    const auto f1 = indicator(grid, {0});
    const auto f2 = indicator(grid, {0, 1});
    const std::int64_t R = 100000;
    std::vector<double> cross(static_cast<std::size_t>(R));
    for (std::int64_t r = 0; r < R; ++r) {
        const auto real = sample_gaussian_cells(frame, SeedInfo{456, static_cast<std::uint64_t>(r)});
        cross[static_cast<std::size_t>(r)] = wiener_integral(f1, real) * wiener_integral(f2, real);
    }
    CHECK(std::abs(*summarize(cross, 0.0).z_score) <= 5.0);
}

TEST_CASE("chaos series") {
    Grid grid({{0.0, 1.0}});
    auto frame = std::make_shared<const GaussianFrame>(kSched, grid);

    std::vector<CellwiseFunction> comps;
    comps.push_back(CellwiseFunction::constant(7.5));
    const ChaosVector constant(std::move(comps));
    const auto real = sample_gaussian_cells(frame, SeedInfo{3, 3});
    CHECK(chaos_series(constant, 0, real) == doctest::Approx(7.5));

    // Var sum = sum over orders of k! ||sym||^2: (0, 1_{[0,1]}, 1_{[0,1]^2}) -> 1 + 2 = 3
    std::vector<CellwiseFunction> comps2;
    comps2.push_back(CellwiseFunction::constant(0.0));
    comps2.push_back(indicator(grid, {0}));
    comps2.push_back(indicator(grid, {0, 0}));
    const ChaosVector h(std::move(comps2));
    const std::int64_t R = 100000;
    std::vector<double> sq(static_cast<std::size_t>(R)), vals(static_cast<std::size_t>(R));
    for (std::int64_t r = 0; r < R; ++r) {
        const auto x = sample_gaussian_cells(frame, SeedInfo{777, static_cast<std::uint64_t>(r)});
        const double v = chaos_series(h, 2, x);
        vals[static_cast<std::size_t>(r)] = v;
        sq[static_cast<std::size_t>(r)] = v * v;
    }
    CHECK(std::abs(*summarize(vals, 0.0).z_score) <= 5.0);  // mean = h^(0) = 0
    CHECK(std::abs(*summarize(sq, 3.0).z_score) <= 5.0);

    // tensor-power fast path agrees with the expanded form
    Grid g2({{0.0, 1.0}, {1.0, 2.0}});
    auto frame2 = std::make_shared<const GaussianFrame>(kSched, g2);
    StepFunction base(g2, {0.9, -0.4});
    for (int k = 1; k <= 4; ++k) {
        const auto expanded = expand_tensor_power(base, k);
        for (std::uint64_t r = 0; r < 10; ++r) {
            const auto x = sample_gaussian_cells(frame2, SeedInfo{999, r});
            CHECK(wiener_integral_tensor_power(base, k, x) ==
                  doctest::Approx(wiener_integral(expanded, x)).epsilon(1e-11));
        }
    }
}
