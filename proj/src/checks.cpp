#include "ewc/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ewc/csv.hpp"
#include "ewc/parallel.hpp"

namespace ewc {

namespace {

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::uint64_t check_stream(std::uint64_t master, const char* check, std::uint64_t a = 0,
                           std::uint64_t b = 0) {
    std::uint64_t s = stream_seed(master, fnv1a64(check));
    s = splitmix64(s ^ (a * 0x9E3779B97F4A7C15ULL));
    return splitmix64(s ^ b);
}

struct CommonPair {
    CellwiseFunction f;
    CellwiseFunction g;
};

CommonPair on_common_grid(const CellwiseFunction& f, const CellwiseFunction& g) {
    const GridRefinement r = refine(f.grid(), g.grid());
    return CommonPair{f.on_refined(r.grid, r.map_a), g.on_refined(r.grid, r.map_b)};
}

double prop2_limit(const CellwiseFunction& f, const CellwiseFunction& g,
                   const TriangularArraySchedule& sched) {
    if (f.order() != g.order()) return 0.0;
    const CellwiseFunction fs = symmetrize(f);
    const CellwiseFunction gs = symmetrize(g);
    return factorial(f.order()) * l2_inner(fs, gs, sched, MeasureKind::Mu);
}

}  // namespace

MomentEstimate estimate_cross_moment(const CellwiseFunction& f, const CellwiseFunction& g,
                                     std::int64_t n, std::int64_t R,
                                     const TriangularArraySchedule& sched, std::uint64_t stream,
                                     int threads) {
    if (R < 2) throw std::invalid_argument("estimate_cross_moment: need R >= 2");
    const CommonPair c = on_common_grid(f, g);
    auto frame = std::make_shared<const CellFrame>(sched, c.f.grid(), n);
    const EvalPlan pf = compile_plan(c.f);
    const EvalPlan pg = compile_plan(c.g);
    const std::vector<double> values = parallel_map(R, threads, [&](std::int64_t i) {
        const CellCounts counts = draw_counts(frame, SeedInfo{stream, static_cast<std::uint64_t>(i)});
        return empirical_integral(pf, counts) * empirical_integral(pg, counts);
    });
    MomentEstimate est = summarize(values, exact_cross_moment(c.f, c.g, n, sched));
    est.limit = prop2_limit(c.f, c.g, sched);
    return est;
}

MomentEstimate check_mean_formula(const CellwiseFunction& f, std::int64_t n, std::int64_t R,
                                  const TriangularArraySchedule& sched, std::uint64_t stream,
                                  int threads) {
    if (R < 2) throw std::invalid_argument("check_mean_formula: need R >= 2");
    auto frame = std::make_shared<const CellFrame>(sched, f.grid(), n);
    const EvalPlan pf = compile_plan(f);
    const std::vector<double> values = parallel_map(R, threads, [&](std::int64_t i) {
        const CellCounts counts = draw_counts(frame, SeedInfo{stream, static_cast<std::uint64_t>(i)});
        return empirical_integral(pf, counts);
    });
    return summarize(values, exact_mean(f, n, sched));
}

double check_diagram_identity(const CellwiseFunction& f, const CellwiseFunction& g, std::int64_t n,
                              std::int64_t realizations, const TriangularArraySchedule& sched,
                              std::uint64_t stream, std::ostream* expansion_csv) {
    if (f.order() > 4 || g.order() > 4)
        throw std::domain_error("check_diagram_identity: orders above 4 exceed the term-count guard");
    const CommonPair c = on_common_grid(f, g);
    const std::vector<ProductExpansionTerm> terms = product_expansion(c.f, c.g, n, sched);
    auto frame = std::make_shared<const CellFrame>(sched, c.f.grid(), n);
    const EvalPlan pf = compile_plan(c.f);
    const EvalPlan pg = compile_plan(c.g);
    std::vector<EvalPlan> term_plans;
    term_plans.reserve(terms.size());
    for (const ProductExpansionTerm& t : terms) term_plans.push_back(compile_plan(t.integrand));

    double max_rel = 0.0;
    for (std::int64_t r = 0; r < realizations; ++r) {
        const CellCounts counts = draw_counts(frame, SeedInfo{stream, static_cast<std::uint64_t>(r)});
        const double lhs = empirical_integral(pf, counts) * empirical_integral(pg, counts);
        KahanSum rhs;
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const double term_value = empirical_integral(term_plans[t], counts);
            rhs.add(terms[t].coefficient * term_value);
            if (r == 0 && expansion_csv) {
                *expansion_csv << terms[t].l << ',' << terms[t].p << ',' << terms[t].count << ','
                               << format_double(terms[t].coefficient) << ','
                               << format_double(term_value) << '\n';
            }
        }
        max_rel = std::max(max_rel, std::abs(lhs - rhs.value()) / (1.0 + std::abs(lhs)));
    }
    return max_rel;
}

std::vector<FlimitRow> f_limit_sweep(const CellwiseFunction& f, const CellwiseFunction& g, int l,
                                     std::span<const std::int64_t> n_grid,
                                     const TriangularArraySchedule& sched) {
    const bool diagonal = f.order() == g.order() && l == f.order();
    const double limit =
        diagonal ? l2_inner(symmetrize(f), symmetrize(g), sched, MeasureKind::Mu) : 0.0;
    std::vector<FlimitRow> rows;
    rows.reserve(n_grid.size());
    for (std::int64_t n : n_grid)
        rows.push_back(FlimitRow{l, n, f_bilinear(f, g, l, n, sched), limit});
    return rows;
}

std::vector<KSReport> ks_convergence(const ChaosVector& h, std::span<const std::int64_t> n_grid,
                                     std::int64_t R, const KRule& rule,
                                     const TriangularArraySchedule& sched, std::uint64_t stream,
                                     int threads) {
    if (h.components.empty()) throw std::invalid_argument("ks_convergence: empty chaos vector");
    const Grid& grid = h.components.back().grid();
    for (const CellwiseFunction& comp : h.components)
        if (!(comp.grid() == grid))
            throw std::invalid_argument("ks_convergence: chaos components must share one grid");

    std::vector<EvalPlan> plans;
    plans.reserve(h.components.size());
    for (const CellwiseFunction& comp : h.components) plans.push_back(compile_plan(comp));
    auto gframe = std::make_shared<const GaussianFrame>(sched, grid);

    std::vector<KSReport> reports;
    for (std::size_t j = 0; j < n_grid.size(); ++j) {
        const std::int64_t n = n_grid[j];
        bool warned = false;
        const int K = k_schedule(n, rule.c, rule.epsilon, sched, &warned);
        auto frame = std::make_shared<const CellFrame>(sched, grid, n);
        const std::uint64_t emp_stream = splitmix64(stream ^ (2 * j + 1));
        const std::uint64_t lim_stream = splitmix64(stream ^ (2 * j + 2));
        std::vector<double> emp = parallel_map(R, threads, [&](std::int64_t i) {
            const CellCounts counts =
                draw_counts(frame, SeedInfo{emp_stream, static_cast<std::uint64_t>(i)});
            return truncated_chaos(plans, K, counts);
        });
        std::vector<double> lim = parallel_map(R, threads, [&](std::int64_t i) {
            const GaussianCellRealization real =
                sample_gaussian_cells(gframe, SeedInfo{lim_stream, static_cast<std::uint64_t>(i)});
            return chaos_series(plans, h.k_max(), real);
        });
        const KSResult ks = ks_two_sample(std::move(emp), std::move(lim));
        reports.push_back(KSReport{n, K, ks.statistic, ks.p_value, R, ks.degenerate});
    }
    return reports;
}

ShapeReport gaussianity_check(std::span<const Interval> set, std::int64_t n, std::int64_t R,
                              const TriangularArraySchedule& sched, std::uint64_t stream,
                              int threads) {
    if (R < 1000) throw std::invalid_argument("gaussianity_check: need R >= 1000");
    std::vector<Interval> cells(set.begin(), set.end());
    std::sort(cells.begin(), cells.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    auto frame = std::make_shared<const CellFrame>(sched, Grid(cells), n);
    const std::vector<double> values = parallel_map(R, threads, [&](std::int64_t i) {
        const CellCounts counts = draw_counts(frame, SeedInfo{stream, static_cast<std::uint64_t>(i)});
        double w = 0.0;
        for (int c = 0; c < frame->grid().size(); ++c) w += w_n_cell(counts, c);
        return w;
    });
    return shape_statistics(values);
}

// ---- orchestration ----------------------------------------------------------

namespace {

struct MomentRow {
    std::string id;
    int k1 = 0;
    int k2 = 0;
    std::int64_t n = 0;
    MomentEstimate est;
};

struct DiagramRow {
    int k1 = 0;
    int k2 = 0;
    int pair = 0;
    std::int64_t n = 0;
    std::int64_t realizations = 0;
    double max_rel_error = 0.0;
};

struct GaussRow {
    std::int64_t n = 0;
    ShapeReport shape;
};

struct Artifacts {
    std::vector<CheckOutcome> outcomes;
    std::vector<MomentRow> moment_rows;
    std::vector<KSReport> converge_rows;
    std::vector<FlimitRow> flimit_rows;
    std::vector<DiagramRow> diagram_rows;
    std::vector<GaussRow> gauss_rows;
};

// Deterministic sparse integrand for the diagram-check matrix: coefficients
// on a fixed 4-cell grid scaled to the window at level n.
CellwiseFunction random_cellwise(int order, const Grid& grid, SplitMixStream& rng) {
    CellwiseFunction f(order, grid);
    IndexTuple idx(static_cast<std::size_t>(order));
    const int t = grid.size();
    std::vector<std::size_t> pos(static_cast<std::size_t>(order), 0);
    while (true) {
        for (int j = 0; j < order; ++j) idx[static_cast<std::size_t>(j)] = static_cast<int>(pos[static_cast<std::size_t>(j)]);
        if (rng.next_unit() < 0.6) f.set(idx, 2.0 * rng.next_unit() - 1.0);
        int j = order - 1;
        while (j >= 0) {
            if (++pos[static_cast<std::size_t>(j)] < static_cast<std::size_t>(t)) break;
            pos[static_cast<std::size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }
    if (f.nonzeros() == 0) f.set(IndexTuple(static_cast<std::size_t>(order), 0), 1.0);
    return f;
}

Grid diagram_test_grid(const TriangularArraySchedule& sched, std::int64_t n) {
    const double e = sched.window_end(n);
    const double frac[] = {0.0, 0.05, 0.15, 0.35, 0.7};
    std::vector<Interval> cells;
    for (std::size_t i = 0; i + 1 < std::size(frac); ++i) cells.push_back({frac[i] * e, frac[i + 1] * e});
    return Grid(std::move(cells));
}

class Orchestrator {
  public:
    Orchestrator(const ExperimentConfig& cfg, std::ostream* expansion_csv)
        : cfg_(cfg), expansion_csv_(expansion_csv) {}

    Artifacts run(const std::vector<std::string>& checks) {
        Artifacts art;
        for (const std::string& name : checks) {
            if (name == "validate")
                art.outcomes.push_back(run_validate());
            else if (name == "moments")
                art.outcomes.push_back(run_moments(art));
            else if (name == "mean")
                art.outcomes.push_back(run_mean(art));
            else if (name == "diagram-check")
                art.outcomes.push_back(run_diagram(art));
            else if (name == "flimits")
                art.outcomes.push_back(run_flimits(art));
            else if (name == "converge")
                art.outcomes.push_back(run_converge(art));
            else if (name == "gaussianity")
                art.outcomes.push_back(run_gaussianity(art));
            else
                throw ConfigError("unknown check '" + name + "'");
        }
        return art;
    }

    std::vector<std::int64_t> all_levels(const std::vector<std::string>& checks) const {
        std::set<std::int64_t> levels(cfg_.n_grid.begin(), cfg_.n_grid.end());
        for (const std::string& c : checks) {
            if (c == "moments")
                for (const MomentCase& mc : cfg_.moments) levels.insert(mc.n_grid.begin(), mc.n_grid.end());
            else if (c == "mean")
                for (const MeanCase& mc : cfg_.means) levels.insert(mc.n);
            else if (c == "diagram-check")
                levels.insert(cfg_.diagram.n);
            else if (c == "flimits" && cfg_.flimits)
                levels.insert(cfg_.flimits->n_grid.begin(), cfg_.flimits->n_grid.end());
            else if (c == "converge" && cfg_.converge)
                levels.insert(cfg_.converge->n_grid.begin(), cfg_.converge->n_grid.end());
            else if (c == "gaussianity" && cfg_.gaussianity)
                levels.insert(cfg_.gaussianity->n);
        }
        return {levels.begin(), levels.end()};
    }

  private:
    CheckOutcome run_validate() {
        std::vector<std::int64_t> grid = all_levels({});
        if (grid.empty()) grid = {10, 100, 1000, 10000};
        const ScheduleReport rep = cfg_.schedule.validate(grid);
        std::string detail;
        for (const ScheduleCheck& c : rep.checks) {
            if (!detail.empty()) detail += "; ";
            detail += c.name + (c.pass ? ": pass" : ": FAIL " + c.detail);
        }
        return CheckOutcome{"validate", rep.pass, detail};
    }

    CheckOutcome run_moments(Artifacts& art) {
        bool pass = true;
        std::string detail;
        for (std::size_t ci = 0; ci < cfg_.moments.size(); ++ci) {
            const MomentCase& mc = cfg_.moments[ci];
            const CellwiseFunction& f = cfg_.integrand(mc.f);
            const CellwiseFunction& g = cfg_.integrand(mc.g);
            const std::string id = "moments/" + mc.f + "*" + mc.g;
            std::vector<double> gaps;
            double last_se = 0.0;
            for (std::size_t ni = 0; ni < mc.n_grid.size(); ++ni) {
                const std::int64_t n = mc.n_grid[ni];
                const std::uint64_t stream = check_stream(cfg_.master_seed, "moments", ci, ni);
                MomentEstimate est =
                    estimate_cross_moment(f, g, n, cfg_.replicates, cfg_.schedule, stream, cfg_.threads);
                if (est.z_score && std::abs(*est.z_score) > 4.0) {
                    pass = false;
                    detail += id + " n=" + std::to_string(n) + " |z|=" + fmt(std::abs(*est.z_score)) + " > 4; ";
                }
                gaps.push_back(std::abs(est.mean - *est.limit));
                last_se = est.standard_error;
                art.moment_rows.push_back(MomentRow{id, f.order(), g.order(), n, est});
            }
            if (mc.trend && mc.n_grid.size() >= 2) {
                for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
                    if (!(gaps[i + 1] < gaps[i])) {
                        pass = false;
                        detail += id + " |mean-limit| not decreasing at step " + std::to_string(i + 1) + "; ";
                    }
                }
                const double tol = std::max(4.0 * last_se, mc.final_tol);
                if (!(gaps.back() <= tol)) {
                    pass = false;
                    detail += id + " final gap " + fmt(gaps.back()) + " > " + fmt(tol) + "; ";
                }
            }
        }
        if (detail.empty())
            detail = "all " + std::to_string(cfg_.moments.size()) + " cases within 4 SE of exact targets";
        return CheckOutcome{"moments", pass, detail};
    }

    CheckOutcome run_mean(Artifacts& art) {
        bool pass = true;
        std::string detail;
        for (std::size_t ci = 0; ci < cfg_.means.size(); ++ci) {
            const MeanCase& mc = cfg_.means[ci];
            const CellwiseFunction& f = cfg_.integrand(mc.f);
            const std::uint64_t stream = check_stream(cfg_.master_seed, "mean", ci);
            MomentEstimate est =
                check_mean_formula(f, mc.n, cfg_.replicates, cfg_.schedule, stream, cfg_.threads);
            const std::string id = "mean/" + mc.f;
            if (est.z_score && std::abs(*est.z_score) > 4.0) {
                pass = false;
                detail += id + " |z|=" + fmt(std::abs(*est.z_score)) + " > 4; ";
            }
            art.moment_rows.push_back(MomentRow{id, f.order(), 0, mc.n, est});
        }
        if (detail.empty())
            detail = "all " + std::to_string(cfg_.means.size()) + " cases within 4 SE of the exact mean formula";
        return CheckOutcome{"mean", pass, detail};
    }

    CheckOutcome run_diagram(Artifacts& art) {
        const DiagramCheckConfig& dc = cfg_.diagram;
        const Grid grid = diagram_test_grid(cfg_.schedule, dc.n);
        double worst = 0.0;
        bool first = true;
        if (expansion_csv_) *expansion_csv_ << "l,p,count,coefficient,empirical_integral_value\n";
        for (int k1 = 1; k1 <= dc.k_max; ++k1) {
            for (int k2 = 1; k2 <= dc.k_max; ++k2) {
                for (int pair = 0; pair < dc.pairs_per_order; ++pair) {
                    SplitMixStream rng(check_stream(cfg_.master_seed, "diagram-integrands",
                                                    static_cast<std::uint64_t>(k1 * 16 + k2),
                                                    static_cast<std::uint64_t>(pair)));
                    const CellwiseFunction f = random_cellwise(k1, grid, rng);
                    const CellwiseFunction g = random_cellwise(k2, grid, rng);
                    const std::uint64_t stream = check_stream(cfg_.master_seed, "diagram-check",
                                                              static_cast<std::uint64_t>(k1 * 16 + k2),
                                                              static_cast<std::uint64_t>(pair));
                    const double rel = check_diagram_identity(f, g, dc.n, dc.realizations, cfg_.schedule,
                                                              stream, first ? expansion_csv_ : nullptr);
                    first = false;
                    worst = std::max(worst, rel);
                    art.diagram_rows.push_back(DiagramRow{k1, k2, pair, dc.n, dc.realizations, rel});
                }
            }
        }
        const bool pass = worst <= dc.tolerance;
        return CheckOutcome{"diagram-check", pass,
                            "max relative error " + fmt(worst, "%.3e") + " vs tolerance " +
                                fmt(dc.tolerance, "%.1e")};
    }

    CheckOutcome run_flimits(Artifacts& art) {
        if (!cfg_.flimits) return CheckOutcome{"flimits", true, "no cases configured"};
        bool pass = true;
        std::string detail;
        for (const FlimitCase& c : cfg_.flimits->cases) {
            const std::vector<FlimitRow> rows = f_limit_sweep(
                cfg_.integrand(c.f), cfg_.integrand(c.g), c.l, cfg_.flimits->n_grid, cfg_.schedule);
            for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
                const double d0 = std::abs(rows[i].value - rows[i].limit);
                const double d1 = std::abs(rows[i + 1].value - rows[i + 1].limit);
                if (d1 > d0 + 1e-12) {
                    pass = false;
                    detail += c.f + "," + c.g + ",l=" + std::to_string(c.l) + " trend violated; ";
                }
            }
            art.flimit_rows.insert(art.flimit_rows.end(), rows.begin(), rows.end());
        }
        if (detail.empty()) detail = "|F_l - limit| non-increasing over the n grid for all cases";
        return CheckOutcome{"flimits", pass, detail};
    }

    CheckOutcome run_converge(Artifacts& art) {
        if (!cfg_.converge) return CheckOutcome{"converge", true, "no chaos configured"};
        const ConvergeConfig& cc = *cfg_.converge;
        const ChaosVector& h = cfg_.chaos(cc.chaos);
        const std::uint64_t stream = check_stream(cfg_.master_seed, "converge");
        const std::vector<KSReport> reports = ks_convergence(h, cc.n_grid, cc.replicates_per_side,
                                                             cfg_.k_rule, cfg_.schedule, stream,
                                                             cfg_.threads);
        bool pass = true;
        std::string detail = "ks:";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            detail += " " + fmt(reports[i].statistic, "%.4f");
            if (i + 1 < reports.size() && !(reports[i + 1].statistic < reports[i].statistic)) pass = false;
        }
        if (!reports.empty()) {
            detail += "; final p=" + fmt(reports.back().p_value, "%.4g");
            if (!(reports.back().p_value > cc.min_final_p)) pass = false;
        }
        if (!pass) detail += " (need strictly decreasing ks and final p > " + fmt(cc.min_final_p, "%.3g") + ")";
        art.converge_rows = reports;
        dump_converge(h, reports);
        return CheckOutcome{"converge", pass, detail};
    }

    CheckOutcome run_gaussianity(Artifacts& art) {
        if (!cfg_.gaussianity) return CheckOutcome{"gaussianity", true, "no set configured"};
        const GaussianityConfig& gc = *cfg_.gaussianity;
        const std::uint64_t stream = check_stream(cfg_.master_seed, "gaussianity");
        const ShapeReport rep =
            gaussianity_check(gc.set, gc.n, gc.replicates, cfg_.schedule, stream, cfg_.threads);
        art.gauss_rows.push_back(GaussRow{gc.n, rep});
        dump_gaussianity_counts(gc);
        if (rep.degenerate)
            return CheckOutcome{"gaussianity", true, "degenerate sample (P_n of the set is 0 or 1); nothing to test"};
        const std::string zs = "skew_z=" + fmt(rep.skew_z) + " kurt_z=" + fmt(rep.kurt_z);
        if (gc.n < 10'000)
            return CheckOutcome{"gaussianity", true, "pre-asymptotic n, recorded only: " + zs};
        const bool pass = std::abs(rep.skew_z) <= 4.0 && std::abs(rep.kurt_z) <= 4.0;
        return CheckOutcome{"gaussianity", pass, zs + (pass ? " within 4 SE" : " outside 4 SE")};
    }

    void dump_converge(const ChaosVector& h, const std::vector<KSReport>& reports) {
        if (!cfg_.dump_counts && !cfg_.dump_gaussians) return;
        const ConvergeConfig& cc = *cfg_.converge;
        const Grid& grid = h.components.back().grid();
        const std::uint64_t stream = check_stream(cfg_.master_seed, "converge");
        for (std::size_t j = 0; j < cc.n_grid.size(); ++j) {
            const std::int64_t n = cc.n_grid[j];
            if (cfg_.dump_counts) {
                auto frame = std::make_shared<const CellFrame>(cfg_.schedule, grid, n);
                const std::uint64_t emp_stream = splitmix64(stream ^ (2 * j + 1));
                CsvWriter w(cfg_.out_dir + "/dump_counts_n" + std::to_string(n) + ".csv",
                            {"replicate", "cell_index", "count"});
                for (std::int64_t r = 0; r < cc.replicates_per_side; ++r) {
                    const CellCounts counts =
                        draw_counts(frame, SeedInfo{emp_stream, static_cast<std::uint64_t>(r)});
                    for (int c = 0; c < grid.size(); ++c)
                        w.write_row_raw({std::to_string(r), std::to_string(c),
                                         std::to_string(counts.counts[static_cast<std::size_t>(c)])});
                }
            }
            if (cfg_.dump_gaussians && j + 1 == cc.n_grid.size()) {
                auto gframe = std::make_shared<const GaussianFrame>(cfg_.schedule, grid);
                const std::uint64_t lim_stream = splitmix64(stream ^ (2 * j + 2));
                CsvWriter w(cfg_.out_dir + "/dump_gaussians.csv", {"replicate", "cell_index", "value"});
                for (std::int64_t r = 0; r < cc.replicates_per_side; ++r) {
                    const GaussianCellRealization real =
                        sample_gaussian_cells(gframe, SeedInfo{lim_stream, static_cast<std::uint64_t>(r)});
                    for (int c = 0; c < grid.size(); ++c)
                        w.write_row_raw({std::to_string(r), std::to_string(c),
                                         format_double(real.values[static_cast<std::size_t>(c)])});
                }
            }
        }
        (void)reports;
    }

    void dump_gaussianity_counts(const GaussianityConfig& gc) {
        if (!cfg_.dump_counts) return;
        std::vector<Interval> cells(gc.set.begin(), gc.set.end());
        std::sort(cells.begin(), cells.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        auto frame = std::make_shared<const CellFrame>(cfg_.schedule, Grid(cells), gc.n);
        const std::uint64_t stream = check_stream(cfg_.master_seed, "gaussianity");
        const std::int64_t limit = std::min<std::int64_t>(gc.replicates, 10'000);
        CsvWriter w(cfg_.out_dir + "/dump_counts_gaussianity.csv", {"replicate", "cell_index", "count"});
        for (std::int64_t r = 0; r < limit; ++r) {
            const CellCounts counts = draw_counts(frame, SeedInfo{stream, static_cast<std::uint64_t>(r)});
            for (int c = 0; c < frame->grid().size(); ++c)
                w.write_row_raw({std::to_string(r), std::to_string(c),
                                 std::to_string(counts.counts[static_cast<std::size_t>(c)])});
        }
    }

    const ExperimentConfig& cfg_;
    std::ostream* expansion_csv_;
};

void write_artifacts(const ExperimentConfig& cfg, const std::vector<std::string>& checks,
                     const Artifacts& art) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);
    const auto ran = [&](const char* name) {
        return std::find(checks.begin(), checks.end(), name) != checks.end();
    };

    if (ran("moments") || ran("mean")) {
        CsvWriter w(cfg.out_dir + "/moments.csv",
                    {"check_id", "k1", "k2", "n", "R", "mean", "se", "target", "z"});
        for (const MomentRow& r : art.moment_rows) {
            w.write_row_raw({r.id, std::to_string(r.k1), std::to_string(r.k2), std::to_string(r.n),
                             std::to_string(r.est.replicates), format_double(r.est.mean),
                             format_double(r.est.standard_error),
                             format_double(r.est.target.value_or(0.0)),
                             format_double(r.est.z_score.value_or(0.0))});
        }
    }
    if (ran("converge")) {
        CsvWriter w(cfg.out_dir + "/converge.csv", {"n", "K", "ks_stat", "p_value", "R"});
        for (const KSReport& r : art.converge_rows)
            w.write_row_raw({std::to_string(r.n), std::to_string(r.K_used), format_double(r.statistic),
                             format_double(r.p_value), std::to_string(r.replicates_per_side)});
    }
    if (ran("flimits")) {
        CsvWriter w(cfg.out_dir + "/flimits.csv", {"l", "n", "value", "limit"});
        for (const FlimitRow& r : art.flimit_rows)
            w.write_row_raw({std::to_string(r.l), std::to_string(r.n), format_double(r.value),
                             format_double(r.limit)});
    }
    if (ran("diagram-check")) {
        CsvWriter w(cfg.out_dir + "/diagram.csv",
                    {"k1", "k2", "pair", "n", "realizations", "max_rel_error"});
        for (const DiagramRow& r : art.diagram_rows)
            w.write_row_raw({std::to_string(r.k1), std::to_string(r.k2), std::to_string(r.pair),
                             std::to_string(r.n), std::to_string(r.realizations),
                             format_double(r.max_rel_error)});
    }
    if (ran("gaussianity")) {
        CsvWriter w(cfg.out_dir + "/gaussianity.csv",
                    {"n", "R", "skewness", "skew_se", "skew_z", "excess_kurtosis", "kurt_se", "kurt_z"});
        for (const GaussRow& r : art.gauss_rows)
            w.write_row_raw({std::to_string(r.n), std::to_string(r.shape.replicates),
                             format_double(r.shape.skewness), format_double(r.shape.skew_se),
                             format_double(r.shape.skew_z), format_double(r.shape.excess_kurtosis),
                             format_double(r.shape.kurt_se), format_double(r.shape.kurt_z)});
    }

    nlohmann::json summary;
    for (const CheckOutcome& o : art.outcomes)
        summary[o.id] = {{"pass", o.pass}, {"detail", o.detail}};
    summary["_meta"] = {{"master_seed", cfg.master_seed},
                        {"replicates", cfg.replicates},
                        {"checks", checks}};
    std::ofstream out(cfg.out_dir + "/summary.json");
    out << summary.dump(2) << '\n';
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const std::vector<std::string>& checks,
                         std::ostream* expansion_csv) {
    std::filesystem::create_directories(cfg.out_dir);
    Orchestrator orch(cfg, expansion_csv);

    // Preconditions: the schedule must behave over every level the run will
    // touch, and chaos supports must sit inside the window at level n0.
    bool sampling = false;
    for (const std::string& c : checks) sampling = sampling || c != "validate";
    if (sampling) {
        const std::vector<std::int64_t> levels = orch.all_levels(checks);
        if (!levels.empty()) {
            const ScheduleReport rep = cfg.schedule.validate(levels);
            if (!rep.pass) {
                std::string why;
                for (const ScheduleCheck& c : rep.checks)
                    if (!c.pass) why += c.name + " ";
                throw ConfigError("schedule fails validation over the run's n levels: " + why);
            }
        }
        const bool want_converge =
            std::find(checks.begin(), checks.end(), "converge") != checks.end();
        if (want_converge && cfg.converge) {
            const ChaosVector& h = cfg.chaos(cfg.converge->chaos);
            const double e0 = cfg.schedule.window_end(cfg.n0);
            for (const CellwiseFunction& comp : h.components) {
                for (const Interval& cell : comp.grid().cells()) {
                    if (cell.hi > e0 + 1e-9)
                        throw ConfigError("chaos component support exceeds the window at n0=" +
                                          std::to_string(cfg.n0) +
                                          " (truncation-rate precondition)");
                }
            }
        }
    }

    Artifacts art = orch.run(checks);
    write_artifacts(cfg, checks, art);
    RunResult res;
    res.outcomes = art.outcomes;
    res.exit_code = 0;
    for (const CheckOutcome& o : art.outcomes)
        if (!o.pass) res.exit_code = 1;
    return res;
}

RunResult run_experiment(const ExperimentConfig& cfg, std::ostream* expansion_csv) {
    return run_experiment(cfg, cfg.checks, expansion_csv);
}

}  // namespace ewc
