// Acceptance suite: runs every acceptance criterion at its stated tolerance
// against the bundled experiment config and prints one pass/fail line each.
//
// usage: acceptance <path-to-cli-binary> <path-to-bundled-config>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ewc/checks.hpp"
#include "ewc/config.hpp"
#include "ewc/diagram.hpp"
#include "ewc/empirical.hpp"

using namespace ewc;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int criterion, bool pass, const std::string& desc, double secs) {
    if (!pass) ++g_failures;
    std::printf("[%s] criterion %d: %s (%.1f s)\n", pass ? "PASS" : "FAIL", criterion, desc.c_str(),
                secs);
    std::fflush(stdout);
}

CellwiseFunction random_cellwise(int order, const Grid& grid, SplitMixStream& rng,
                                 double density = 0.6) {
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

struct MomentCsvRow {
    std::string id;
    int k1, k2;
    std::int64_t n, R;
    double mean, se, target, z;
};

std::vector<MomentCsvRow> read_moments_csv(const std::string& path) {
    std::ifstream in(path);
    std::vector<MomentCsvRow> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string field;
        MomentCsvRow r;
        std::getline(ss, r.id, ',');
        std::getline(ss, field, ','); r.k1 = std::stoi(field);
        std::getline(ss, field, ','); r.k2 = std::stoi(field);
        std::getline(ss, field, ','); r.n = std::stoll(field);
        std::getline(ss, field, ','); r.R = std::stoll(field);
        std::getline(ss, field, ','); r.mean = std::stod(field);
        std::getline(ss, field, ','); r.se = std::stod(field);
        std::getline(ss, field, ','); r.target = std::stod(field);
        std::getline(ss, field, ','); r.z = std::stod(field);
        rows.push_back(r);
    }
    return rows;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const CheckOutcome* find_outcome(const RunResult& res, const std::string& id) {
    for (const CheckOutcome& o : res.outcomes)
        if (o.id == id) return &o;
    return nullptr;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <cli-binary> <config.json>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const std::string config_path = argv[2];
    const std::string out_root = "acceptance_out";
    fs::remove_all(out_root);
    fs::create_directories(out_root);

    ExperimentConfig base = load_config(config_path);
    const auto sched = base.schedule;

    // 1. product-decomposition identity on the bundled random matrix
    {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentConfig cfg = base;
        cfg.out_dir = out_root + "/diagram";
        bool pass = cfg.diagram.n == 500 && cfg.diagram.realizations == 100 &&
                    cfg.diagram.k_max == 3 && cfg.diagram.pairs_per_order == 5 &&
                    cfg.diagram.tolerance == 1e-9;
        std::string desc = "diagram identity, k1,k2 <= 3, 5 pairs each, n=500, 100 realizations";
        if (!pass) {
            desc += " [bundled config does not match the pinned matrix]";
        } else {
            const RunResult res = run_experiment(cfg, {"diagram-check"});
            const CheckOutcome* o = find_outcome(res, "diagram-check");
            pass = o && o->pass;
            if (o) desc += " -- " + o->detail;
        }
        const double secs = seconds_since(t0);
        report(1, pass && secs <= 60.0, desc, secs);
    }

    // 2. fast evaluator vs brute-force point-level oracle
    {
        const auto t0 = std::chrono::steady_clock::now();
        Grid grid({{0.0, 1.0}, {1.0, 2.0}, {2.0, 3.5}});
        SplitMixStream rng(stream_seed(base.master_seed, fnv1a64("acceptance-oracle")));
        double worst = 0.0;
        int count = 0;
        for (int rep = 0; rep < 200; ++rep) {
            const int k = 1 + static_cast<int>(rng.next_u64() % 3);
            const std::int64_t n = 5 + static_cast<std::int64_t>(rng.next_u64() % 26);
            auto frame = std::make_shared<const CellFrame>(sched, grid, n);
            const CellwiseFunction f = random_cellwise(k, grid, rng);
            const PointSample pts =
                draw_points(frame, SeedInfo{stream_seed(base.master_seed, fnv1a64("acceptance-points")),
                                            static_cast<std::uint64_t>(rep)});
            const CellCounts cc = counts_from_points(pts);
            const double fast = empirical_integral(f, cc);
            const double slow = empirical_integral_bruteforce(f, pts);
            worst = std::max(worst, std::abs(fast - slow) / (1.0 + std::abs(slow)));
            ++count;
        }
        const double secs = seconds_since(t0);
        std::ostringstream desc;
        desc << "oracle equivalence over " << count << " random integrands, max rel err " << worst;
        report(2, worst <= 1e-10 && secs <= 60.0, desc.str(), secs);
    }

    // 3 + 4. exact finite-n moments and asymptotic cross-moment limits
    {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentConfig cfg = base;
        cfg.out_dir = out_root + "/moments";
        const RunResult res = run_experiment(cfg, {"moments", "mean"});
        const double secs = seconds_since(t0);
        const auto rows = read_moments_csv(cfg.out_dir + "/moments.csv");

        // criterion 3: pinned exact targets hit within 4 SE
        bool pass3 = true;
        std::string why3;
        struct Pinned {
            const char* id;
            std::int64_t n;
            double target;
        };
        const Pinned pinned[] = {{"moments/ind_01*ind_01", 10000, 0.99},
                                 {"moments/ind_01*ind_12", 10000, -0.01},
                                 {"mean/ind_01sq", 10000, -0.01}};
        for (const Pinned& p : pinned) {
            bool found = false;
            for (const auto& r : rows) {
                if (r.id == p.id && r.n == p.n) {
                    found = true;
                    if (std::abs(r.target - p.target) > 1e-9) {
                        pass3 = false;
                        why3 += std::string(p.id) + " target mismatch; ";
                    }
                    if (std::abs(r.z) > 4.0) {
                        pass3 = false;
                        why3 += std::string(p.id) + " |z| > 4; ";
                    }
                }
            }
            if (!found) {
                pass3 = false;
                why3 += std::string(p.id) + " missing; ";
            }
        }
        // criteria 3 and 4 share one run of the moments+mean checks; the
        // combined budget is 2 min + 5 min
        report(3, pass3 && secs <= 420.0,
               "exact finite-n moments (Var 0.99, Cov -0.01, mean -0.01) within 4 SE" +
                   (why3.empty() ? "" : ": " + why3),
               secs);

        // criterion 4: trend cases decrease toward the limit, final within tolerance
        const CheckOutcome* o = find_outcome(res, "moments");
        bool pass4 = o && o->pass;
        // trend pairs must each span the pinned grid
        int trend_rows = 0;
        for (const auto& r : rows)
            if (r.id == "moments/ind_01*ind_01x12" || r.id == "moments/ind_01x12*ind_01x12") ++trend_rows;
        pass4 = pass4 && trend_rows == 6;
        report(4, pass4, std::string("cross-moment limits (k1,k2) in {(1,2),(1,1),(2,2)}: ") +
                             (o ? o->detail : "missing"), secs);
    }

    // 5. deterministic F-sweeps against hand closed forms
    {
        const auto t0 = std::chrono::steady_clock::now();
        Grid g({{0.0, 1.0}});
        CellwiseFunction a(1, g);
        a.set({0}, 1.0);
        const std::vector<std::int64_t> grid = {100, 10000, 1000000};
        const auto rows0 = f_limit_sweep(a, a, 0, grid, sched);
        const auto rows1 = f_limit_sweep(a, a, 1, grid, sched);
        bool pass = true;
        const double want0[] = {0.1, 0.01, 0.001};
        for (int i = 0; i < 3; ++i) {
            pass = pass && std::abs(rows0[static_cast<std::size_t>(i)].value - want0[i]) <= 1e-12;
            pass = pass && std::abs(rows1[static_cast<std::size_t>(i)].value - 1.0) <= 1e-12;
        }
        ExperimentConfig cfg = base;
        cfg.out_dir = out_root + "/flimits";
        const RunResult res = run_experiment(cfg, {"flimits"});
        const CheckOutcome* o = find_outcome(res, "flimits");
        pass = pass && o && o->pass;
        const double secs = seconds_since(t0);
        report(5, pass && secs <= 5.0, "F_l sweeps match closed forms {0.1,0.01,0.001} and 1.0; trends monotone",
               secs);
    }

    // 6. combinatorial coefficients and enumeration counts
    {
        const auto t0 = std::chrono::steady_clock::now();
        bool pass = true;
        std::string why;
        for (std::int64_t n : {10LL, 100LL, 1000LL, 1000000LL}) {
            if (std::abs(b_coeff(n, 2) + 0.5) > 1e-14) {
                pass = false;
                why += "B_{n,2}; ";
            }
        }
        if (std::abs(b_coeff(100, 3) - 1.0 / 30.0) > 1e-14) {
            pass = false;
            why += "B_{100,3}; ";
        }
        for (std::int64_t n = 10; n <= 1000000; n *= 10) {
            for (int k = 0; k <= 10; ++k) {
                if (std::abs(b_coeff(n, k)) * std::pow(static_cast<double>(k), 0.5 * k) >
                    std::pow(10.0, k)) {
                    pass = false;
                    why += "bound; ";
                }
            }
        }
        for (int k1 = 0; k1 <= 5 && pass; ++k1) {
            for (int k2 = 0; k2 <= 5; ++k2) {
                for (int l = 0; l <= std::min(k1, k2); ++l) {
                    if (enumerate_diagrams(k1, k2, l)->size() != diagram_count(k1, k2, l)) {
                        pass = false;
                        why += "enum; ";
                    }
                    for (int p = 0; p <= l; ++p) {
                        if (enumerate_colored_diagrams(k1, k2, l, p)->size() !=
                            colored_diagram_count(k1, k2, l, p)) {
                            pass = false;
                            why += "enum colored; ";
                        }
                    }
                }
            }
        }
        const double secs = seconds_since(t0);
        report(6, pass && secs <= 10.0,
               "B_{n,2} = -1/2, B_{100,3} = 1/30, growth bound, enumeration counts" +
                   (why.empty() ? "" : ": " + why),
               secs);
    }

    // 7. weak-convergence trend of the truncated chaos
    {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentConfig cfg = base;
        cfg.out_dir = out_root + "/converge";
        bool pass = cfg.converge && cfg.converge->replicates_per_side == 2000 &&
                    cfg.converge->min_final_p == 0.005 && cfg.converge->n_grid.size() == 3;
        std::string desc = "KS trend for the nested-indicator chaos (K_max=5, c=2, eps=0.5)";
        if (pass) {
            const RunResult res = run_experiment(cfg, {"converge"});
            const CheckOutcome* o = find_outcome(res, "converge");
            pass = o && o->pass;
            if (o) desc += " -- " + o->detail;
        } else {
            desc += " [bundled converge config does not match the pinned parameters]";
        }
        const double secs = seconds_since(t0);
        report(7, pass && secs <= 300.0, desc, secs);
    }

    // 8. CLT shape statistics of the normalized empirical measure
    {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentConfig cfg = base;
        cfg.out_dir = out_root + "/gaussianity";
        bool pass = cfg.gaussianity && cfg.gaussianity->n == 1000000 &&
                    cfg.gaussianity->replicates == 100000;
        std::string desc = "skewness/kurtosis of W_n([0,1]) at n=1e6, R=1e5 within 4 SE";
        if (pass) {
            const RunResult res = run_experiment(cfg, {"gaussianity"});
            const CheckOutcome* o = find_outcome(res, "gaussianity");
            pass = o && o->pass;
            if (o) desc += " -- " + o->detail;
        } else {
            desc += " [bundled gaussianity config does not match the pinned parameters]";
        }
        const double secs = seconds_since(t0);
        report(8, pass && secs <= 60.0, desc, secs);
    }

    // 9. byte-identical outputs across thread counts
    {
        const auto t0 = std::chrono::steady_clock::now();
        const std::string dir1 = out_root + "/det1";
        const std::string dir2 = out_root + "/det2";
        // reduced replicates: the property under test is scheduling invariance
        const std::string common = " all " + config_path + " --seed 42 --replicates 2000 ";
        const std::string cmd1 = cli + common + "--threads 1 --out-dir " + dir1 + " >/dev/null 2>&1";
        const std::string cmd2 = cli + common + "--threads 4 --out-dir " + dir2 + " >/dev/null 2>&1";
        const int rc1 = std::system(cmd1.c_str());
        const int rc2 = std::system(cmd2.c_str());
        bool pass = true;
        std::string why;
        // the reduced-replicate runs may fail statistically (exit 1); only a
        // missing/ill-formed run (exit 2 or no artifacts) is a problem here
        if (rc1 < 0 || rc2 < 0) {
            pass = false;
            why += "cli invocation failed; ";
        }
        const char* files[] = {"moments.csv", "converge.csv", "flimits.csv",
                               "diagram.csv", "gaussianity.csv", "summary.json"};
        for (const char* f : files) {
            const fs::path p1 = fs::path(dir1) / f;
            const fs::path p2 = fs::path(dir2) / f;
            if (!fs::exists(p1) || !fs::exists(p2)) {
                pass = false;
                why += std::string(f) + " missing; ";
                continue;
            }
            if (slurp(p1) != slurp(p2)) {
                pass = false;
                why += std::string(f) + " differs; ";
            }
        }
        const double secs = seconds_since(t0);
        report(9, pass, "byte-identical CSVs across --threads 1 vs 4" + (why.empty() ? "" : ": " + why),
               secs);
    }

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
}
