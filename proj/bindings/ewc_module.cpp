#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ewc/checks.hpp"
#include "ewc/config.hpp"
#include "ewc/diagram.hpp"
#include "ewc/empirical.hpp"
#include "ewc/stats.hpp"
#include "ewc/wiener.hpp"

namespace py = pybind11;
using namespace ewc;

namespace {

std::vector<Interval> to_intervals(const std::vector<std::pair<double, double>>& pairs) {
    std::vector<Interval> out;
    out.reserve(pairs.size());
    for (const auto& [lo, hi] : pairs) out.push_back({lo, hi});
    return out;
}

}  // namespace

PYBIND11_MODULE(_ewc, m) {
    m.doc() = "Multiple stochastic integrals against normalized empirical measures in a "
              "triangular-array scheme, their Wiener-chaos limits, and the verification checks";

    py::class_<Interval>(m, "Interval")
        .def(py::init<double, double>(), py::arg("lo"), py::arg("hi"))
        .def_readonly("lo", &Interval::lo)
        .def_readonly("hi", &Interval::hi)
        .def("__repr__", [](const Interval& iv) {
            return "Interval(" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + ")";
        });

    py::class_<ControlMeasure>(m, "ControlMeasure")
        .def(py::init<>())
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("breakpoints"),
             py::arg("values"))
        .def("mass", [](const ControlMeasure& c, double lo, double hi) { return c.mass({lo, hi}); });

    py::class_<WindowRule>(m, "WindowRule")
        .def_static("power", &WindowRule::power, py::arg("alpha"))
        .def_static("log", &WindowRule::log)
        .def_static("from_table", &WindowRule::from_table, py::arg("values"))
        .def("eval", &WindowRule::eval, py::arg("n"));

    py::class_<TriangularArraySchedule>(m, "Schedule")
        .def(py::init<ControlMeasure, WindowRule>(), py::arg("control"), py::arg("window"))
        .def_static("standard", &TriangularArraySchedule::standard)
        .def("window_end", &TriangularArraySchedule::window_end, py::arg("n"))
        .def("a_n", &TriangularArraySchedule::a_n, py::arg("n"))
        .def("mu_mass",
             [](const TriangularArraySchedule& s, const std::vector<std::pair<double, double>>& cells) {
                 const auto iv = to_intervals(cells);
                 return s.mu_mass(std::span<const Interval>(iv));
             }, py::arg("cells"))
        .def("p_n",
             [](const TriangularArraySchedule& s, const std::vector<std::pair<double, double>>& cells,
                std::int64_t n) {
                 const auto iv = to_intervals(cells);
                 return s.p_n(std::span<const Interval>(iv), n);
             }, py::arg("cells"), py::arg("n"))
        .def("mu_n_mass",
             [](const TriangularArraySchedule& s, const std::vector<std::pair<double, double>>& cells,
                std::int64_t n) {
                 const auto iv = to_intervals(cells);
                 return s.mu_n_mass(std::span<const Interval>(iv), n);
             }, py::arg("cells"), py::arg("n"))
        .def("validate", [](const TriangularArraySchedule& s, const std::vector<std::int64_t>& grid) {
            const ScheduleReport rep = s.validate(grid);
            py::dict out;
            out["pass"] = rep.pass;
            py::list checks;
            for (const auto& c : rep.checks) {
                py::dict d;
                d["name"] = c.name;
                d["pass"] = c.pass;
                d["detail"] = c.detail;
                checks.append(d);
            }
            out["checks"] = checks;
            return out;
        }, py::arg("n_grid"));

    py::class_<Grid>(m, "Grid")
        .def(py::init([](const std::vector<std::pair<double, double>>& cells) {
                 return Grid(to_intervals(cells));
             }), py::arg("cells"))
        .def("size", &Grid::size)
        .def("locate", &Grid::locate, py::arg("x"));

    py::class_<CellwiseFunction>(m, "CellwiseFunction")
        .def(py::init<int, Grid>(), py::arg("order"), py::arg("grid"))
        .def_static("constant", &CellwiseFunction::constant, py::arg("value"))
        .def_static("product_indicator",
                    [](const Grid& grid, const std::vector<std::pair<double, double>>& factors,
                       double scale) {
                        return CellwiseFunction::product_indicator(grid, to_intervals(factors), scale);
                    }, py::arg("grid"), py::arg("factors"), py::arg("scale") = 1.0)
        .def("set", &CellwiseFunction::set, py::arg("idx"), py::arg("val"))
        .def("at", &CellwiseFunction::at, py::arg("idx"))
        .def_property_readonly("order", &CellwiseFunction::order)
        .def_property_readonly("vanishes_on_repeats", &CellwiseFunction::vanishes_on_repeats)
        .def("nonzeros", &CellwiseFunction::nonzeros);

    m.def("symmetrize", [](const CellwiseFunction& f) { return symmetrize(f); }, py::arg("f"));
    m.def("tensor", [](const CellwiseFunction& f, const CellwiseFunction& g) { return tensor(f, g); },
          py::arg("f"), py::arg("g"));
    m.def("l2_inner",
          [](const CellwiseFunction& f, const CellwiseFunction& g, const TriangularArraySchedule& s,
             const std::string& measure, std::int64_t n) {
              MeasureKind kind = MeasureKind::Mu;
              if (measure == "mu") kind = MeasureKind::Mu;
              else if (measure == "mu_n") kind = MeasureKind::MuN;
              else if (measure == "p_n") kind = MeasureKind::Pn;
              else throw std::invalid_argument("measure must be mu|mu_n|p_n");
              return l2_inner(f, g, s, kind, n);
          }, py::arg("f"), py::arg("g"), py::arg("schedule"), py::arg("measure") = "mu", py::arg("n") = 0);

    py::class_<StepFunction>(m, "StepFunction")
        .def(py::init<Grid, std::vector<double>>(), py::arg("grid"), py::arg("values"));
    m.def("expand_tensor_power",
          [](const StepFunction& g, int k) { return expand_tensor_power(g, k); }, py::arg("g"),
          py::arg("k"));

    py::class_<ChaosVector>(m, "ChaosVector")
        .def(py::init<std::vector<CellwiseFunction>>(), py::arg("components"))
        .def_property_readonly("k_max", &ChaosVector::k_max);
    m.def("h_norm", &h_norm, py::arg("h"), py::arg("schedule"));

    // diagram calculus
    m.def("diagram_count", &diagram_count, py::arg("k1"), py::arg("k2"), py::arg("l"));
    m.def("colored_diagram_count", &colored_diagram_count, py::arg("k1"), py::arg("k2"), py::arg("l"),
          py::arg("p"));
    m.def("set_partition_count", &set_partition_count, py::arg("parts"));
    m.def("b_coeff", &b_coeff, py::arg("n"), py::arg("k"));
    m.def("exact_mean", &exact_mean, py::arg("f"), py::arg("n"), py::arg("schedule"));
    m.def("exact_cross_moment", &exact_cross_moment, py::arg("f"), py::arg("g"), py::arg("n"),
          py::arg("schedule"));
    m.def("f_bilinear", &f_bilinear, py::arg("f"), py::arg("g"), py::arg("l"), py::arg("n"),
          py::arg("schedule"), py::arg("p") = -1);
    m.def("averaged_contraction", &averaged_contraction, py::arg("f"), py::arg("g"), py::arg("l"),
          py::arg("p"), py::arg("n"), py::arg("schedule"));

    // empirical side
    py::class_<CellFrame, std::shared_ptr<CellFrame>>(m, "CellFrame")
        .def(py::init<TriangularArraySchedule, Grid, std::int64_t>(), py::arg("schedule"),
             py::arg("grid"), py::arg("n"))
        .def_property_readonly("n", &CellFrame::n)
        .def_property_readonly("a_n", &CellFrame::a_n)
        .def_property_readonly("pn", &CellFrame::pn);

    py::class_<SeedInfo>(m, "SeedInfo")
        .def(py::init([](std::uint64_t stream, std::uint64_t replicate) {
                 return SeedInfo{stream, replicate};
             }), py::arg("stream"), py::arg("replicate"))
        .def_readonly("stream", &SeedInfo::stream)
        .def_readonly("replicate", &SeedInfo::replicate);

    py::class_<CellCounts>(m, "CellCounts")
        .def_readonly("counts", &CellCounts::counts)
        .def_readonly("rest", &CellCounts::rest);

    m.def("draw_counts",
          [](std::shared_ptr<CellFrame> frame, std::uint64_t stream, std::uint64_t replicate) {
              return draw_counts(std::move(frame), SeedInfo{stream, replicate});
          }, py::arg("frame"), py::arg("stream"), py::arg("replicate"));
    m.def("w_n", [](const CellCounts& cc, const std::vector<std::pair<double, double>>& cells) {
        const auto iv = to_intervals(cells);
        return w_n(cc, std::span<const Interval>(iv));
    }, py::arg("counts"), py::arg("cells"));
    m.def("empirical_integral",
          [](const CellwiseFunction& f, const CellCounts& cc) { return empirical_integral(f, cc); },
          py::arg("f"), py::arg("counts"));
    m.def("truncated_chaos",
          [](const ChaosVector& h, int K, const CellCounts& cc) { return truncated_chaos(h, K, cc); },
          py::arg("h"), py::arg("K"), py::arg("counts"));
    m.def("k_schedule",
          [](std::int64_t n, double c, double eps, const TriangularArraySchedule& s) {
              return k_schedule(n, c, eps, s);
          }, py::arg("n"), py::arg("c"), py::arg("eps"), py::arg("schedule"));

    // gaussian side
    py::class_<GaussianFrame, std::shared_ptr<GaussianFrame>>(m, "GaussianFrame")
        .def(py::init<TriangularArraySchedule, Grid>(), py::arg("schedule"), py::arg("grid"))
        .def_property_readonly("mu", &GaussianFrame::mu);
    py::class_<GaussianCellRealization>(m, "GaussianCellRealization")
        .def_readonly("values", &GaussianCellRealization::values);
    m.def("sample_gaussian_cells",
          [](std::shared_ptr<GaussianFrame> frame, std::uint64_t stream, std::uint64_t replicate) {
              return sample_gaussian_cells(std::move(frame), SeedInfo{stream, replicate});
          }, py::arg("frame"), py::arg("stream"), py::arg("replicate"));
    m.def("hermite", &hermite, py::arg("m"), py::arg("x"));
    m.def("wiener_integral",
          [](const CellwiseFunction& f, const GaussianCellRealization& r) {
              return wiener_integral(f, r);
          }, py::arg("f"), py::arg("realization"));
    m.def("chaos_series",
          [](const ChaosVector& h, int K, const GaussianCellRealization& r) {
              return chaos_series(h, K, r);
          }, py::arg("h"), py::arg("K"), py::arg("realization"));

    // statistics and experiment driver
    m.def("ks_two_sample", [](std::vector<double> a, std::vector<double> b) {
        const KSResult r = ks_two_sample(std::move(a), std::move(b));
        py::dict out;
        out["statistic"] = r.statistic;
        out["p_value"] = r.p_value;
        out["degenerate"] = r.degenerate;
        return out;
    }, py::arg("a"), py::arg("b"));

    m.def("run_experiment_file",
          [](const std::string& config_path, const std::string& out_dir, int threads) {
              ExperimentConfig cfg = load_config(config_path);
              if (!out_dir.empty()) cfg.out_dir = out_dir;
              cfg.threads = threads;
              const RunResult res = run_experiment(cfg);
              py::dict out;
              out["exit_code"] = res.exit_code;
              py::dict checks;
              for (const auto& o : res.outcomes) {
                  py::dict d;
                  d["pass"] = o.pass;
                  d["detail"] = o.detail;
                  checks[py::str(o.id)] = d;
              }
              out["checks"] = checks;
              return out;
          }, py::arg("config_path"), py::arg("out_dir") = "", py::arg("threads") = 0);

    py::register_exception<ConfigError>(m, "ConfigError");
}
