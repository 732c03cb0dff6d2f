#include "ewc/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ewc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw ConfigError("config: " + where + ": " + msg);
}

const json& require(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
    return *it;
}

std::vector<std::int64_t> parse_n_grid(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of integers");
    std::vector<std::int64_t> grid;
    for (const auto& v : j) grid.push_back(v.get<std::int64_t>());
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1])) fail(where, "n grid must be strictly increasing");
    if (grid.front() < 1) fail(where, "n must be >= 1");
    return grid;
}

Interval parse_interval(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2) fail(where, "interval must be [lo, hi]");
    Interval iv{j[0].get<double>(), j[1].get<double>()};
    if (!(iv.lo >= 0.0) || !(iv.hi > iv.lo)) fail(where, "interval must satisfy 0 <= lo < hi");
    return iv;
}

Grid parse_grid(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "grid must be a non-empty array of intervals");
    std::vector<Interval> cells;
    for (std::size_t i = 0; i < j.size(); ++i)
        cells.push_back(parse_interval(j[i], where + ".grid[" + std::to_string(i) + "]"));
    try {
        return Grid(std::move(cells));
    } catch (const std::exception& e) {
        fail(where, e.what());
    }
}

StepFunction parse_step(const json& j, const std::string& where) {
    Grid grid = parse_grid(require(j, "grid", where), where);
    const json& jv = require(j, "values", where);
    if (!jv.is_array() || static_cast<int>(jv.size()) != grid.size())
        fail(where, "values must list one number per grid cell");
    std::vector<double> values;
    for (const auto& v : jv) values.push_back(v.get<double>());
    return StepFunction(std::move(grid), std::move(values));
}

// Grid induced by a family of interval factors: all endpoint breakpoints,
// cells kept where at least one factor covers them.
Grid grid_from_factors(const std::vector<Interval>& factors) {
    std::vector<double> pts;
    for (const Interval& f : factors) {
        pts.push_back(f.lo);
        pts.push_back(f.hi);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<Interval> cells;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double mid = 0.5 * (pts[i] + pts[i + 1]);
        for (const Interval& f : factors) {
            if (f.contains(mid)) {
                cells.push_back({pts[i], pts[i + 1]});
                break;
            }
        }
    }
    return Grid(std::move(cells));
}

CellwiseFunction parse_cellwise_like(const json& j, const std::string& where);

ChaosVector parse_chaos(const json& j, const std::string& where) {
    const json& comps = require(j, "components", where);
    if (!comps.is_array() || comps.empty()) fail(where, "components must be a non-empty array");
    std::vector<CellwiseFunction> parsed;
    std::vector<bool> present;
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const std::string cw = where + ".components[" + std::to_string(k) + "]";
        if (comps[k].is_null()) {
            present.push_back(false);
            parsed.push_back(CellwiseFunction::constant(0.0));  // placeholder, regridded below
            continue;
        }
        CellwiseFunction f = parse_cellwise_like(comps[k], cw);
        if (f.order() != static_cast<int>(k)) fail(cw, "component k must have order k");
        present.push_back(true);
        parsed.push_back(std::move(f));
    }
    // common grid across all present components
    std::optional<Grid> common;
    for (std::size_t k = 0; k < parsed.size(); ++k) {
        if (!present[k]) continue;
        common = common ? refine(*common, parsed[k].grid()).grid : parsed[k].grid();
    }
    if (!common) fail(where, "chaos vector needs at least one non-null component");
    std::vector<CellwiseFunction> components;
    for (std::size_t k = 0; k < parsed.size(); ++k) {
        if (present[k]) {
            const GridRefinement r = refine(parsed[k].grid(), *common);
            components.push_back(parsed[k].on_refined(r.grid, r.map_a));
        } else {
            CellwiseFunction zero(static_cast<int>(k), *common);
            if (k == 0) zero.set({}, 0.0);
            components.push_back(std::move(zero));
        }
    }
    return ChaosVector(std::move(components));
}

CellwiseFunction parse_cellwise_like(const json& j, const std::string& where) {
    const std::string type = require(j, "type", where).get<std::string>();
    if (type == "cellwise") {
        const int order = require(j, "order", where).get<int>();
        Grid grid = parse_grid(require(j, "grid", where), where);
        CellwiseFunction f(order, grid);
        const json& coeffs = require(j, "coeffs", where);
        if (!coeffs.is_array()) fail(where, "coeffs must be an array");
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            const std::string cw = where + ".coeffs[" + std::to_string(i) + "]";
            const json& entry = coeffs[i];
            const json& idx = require(entry, "idx", cw);
            if (!idx.is_array() || static_cast<int>(idx.size()) != order)
                fail(cw, "idx must list `order` cell indices");
            IndexTuple tuple;
            for (const auto& v : idx) {
                const int one_based = v.get<int>();
                if (one_based < 1 || one_based > grid.size())
                    fail(cw, "cell index out of range (indices are 1-based)");
                tuple.push_back(one_based - 1);
            }
            f.add(tuple, require(entry, "val", cw).get<double>());
        }
        return f;
    }
    if (type == "tensor_power") {
        const int k = require(j, "k", where).get<int>();
        StepFunction g = parse_step(require(j, "g", where), where + ".g");
        try {
            return expand_tensor_power(g, k);
        } catch (const std::exception& e) {
            fail(where, e.what());
        }
    }
    if (type == "product_indicator") {
        const json& jf = require(j, "factors", where);
        if (!jf.is_array() || jf.empty()) fail(where, "factors must be a non-empty array of intervals");
        std::vector<Interval> factors;
        for (std::size_t i = 0; i < jf.size(); ++i)
            factors.push_back(parse_interval(jf[i], where + ".factors[" + std::to_string(i) + "]"));
        const double scale = j.value("scale", 1.0);
        return CellwiseFunction::product_indicator(grid_from_factors(factors), factors, scale);
    }
    if (type == "constant") {
        return CellwiseFunction::constant(require(j, "value", where).get<double>());
    }
    fail(where, "unknown integrand type '" + type + "'");
}

TriangularArraySchedule parse_schedule(const json& j, const std::string& where) {
    ControlMeasure control;
    if (j.contains("control_density")) {
        const json& jc = j["control_density"];
        std::vector<double> breaks;
        std::vector<double> values;
        for (const auto& v : require(jc, "breakpoints", where + ".control_density")) breaks.push_back(v.get<double>());
        for (const auto& v : require(jc, "values", where + ".control_density")) values.push_back(v.get<double>());
        try {
            control = ControlMeasure(std::move(breaks), std::move(values));
        } catch (const std::exception& e) {
            fail(where + ".control_density", e.what());
        }
    }
    WindowRule window = WindowRule::power(0.5);
    if (j.contains("window")) {
        const json& jw = j["window"];
        const std::string rule = require(jw, "rule", where + ".window").get<std::string>();
        try {
            if (rule == "power")
                window = WindowRule::power(require(jw, "alpha", where + ".window").get<double>());
            else if (rule == "log")
                window = WindowRule::log();
            else if (rule == "table") {
                std::vector<double> tab;
                for (const auto& v : require(jw, "values", where + ".window")) tab.push_back(v.get<double>());
                window = WindowRule::from_table(std::move(tab));
            } else
                fail(where + ".window", "rule must be one of power|log|table");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            fail(where + ".window", e.what());
        }
    }
    return TriangularArraySchedule(std::move(control), std::move(window));
}

}  // namespace

const CellwiseFunction& ExperimentConfig::integrand(const std::string& name) const {
    auto it = integrands.find(name);
    if (it == integrands.end()) throw ConfigError("config: unknown integrand '" + name + "'");
    return it->second;
}

const ChaosVector& ExperimentConfig::chaos(const std::string& name) const {
    auto it = chaos_vectors.find(name);
    if (it == chaos_vectors.end()) throw ConfigError("config: unknown chaos vector '" + name + "'");
    return it->second;
}

ExperimentConfig parse_config_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + origin + ": " + e.what());
    }
    ExperimentConfig cfg;
    if (j.contains("schedule")) cfg.schedule = parse_schedule(j["schedule"], "schedule");

    if (j.contains("integrands")) {
        const json& ji = j["integrands"];
        if (!ji.is_object()) fail("integrands", "must be an object of named specs");
        for (auto it = ji.begin(); it != ji.end(); ++it) {
            const std::string where = "integrands." + it.key();
            const std::string type = require(*it, "type", where).get<std::string>();
            if (type == "chaos")
                cfg.chaos_vectors.emplace(it.key(), parse_chaos(*it, where));
            else
                cfg.integrands.emplace(it.key(), parse_cellwise_like(*it, where));
        }
    }

    if (j.contains("n_grid")) cfg.n_grid = parse_n_grid(j["n_grid"], "n_grid");
    if (j.contains("replicates")) cfg.replicates = j["replicates"].get<std::int64_t>();
    if (cfg.replicates < 2) fail("replicates", "must be >= 2");
    if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("k_rule")) {
        cfg.k_rule.c = require(j["k_rule"], "c", "k_rule").get<double>();
        cfg.k_rule.epsilon = require(j["k_rule"], "epsilon", "k_rule").get<double>();
        if (!(cfg.k_rule.c > 0.0)) fail("k_rule.c", "must be > 0");
        if (!(cfg.k_rule.epsilon > 0.0 && cfg.k_rule.epsilon < 1.0)) fail("k_rule.epsilon", "must be in (0,1)");
    }
    if (j.contains("n0")) cfg.n0 = j["n0"].get<std::int64_t>();
    if (cfg.n0 < 1) fail("n0", "must be >= 1");
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();

    static const std::set<std::string> known_checks = {
        "validate", "moments", "mean", "diagram-check", "flimits", "converge", "gaussianity"};
    if (j.contains("checks")) {
        for (const auto& c : j["checks"]) {
            const std::string name = c.get<std::string>();
            if (!known_checks.count(name)) fail("checks", "unknown check '" + name + "'");
            cfg.checks.push_back(name);
        }
    }

    if (j.contains("moments")) {
        const json& jm = require(j["moments"], "cases", "moments");
        for (std::size_t i = 0; i < jm.size(); ++i) {
            const std::string where = "moments.cases[" + std::to_string(i) + "]";
            MomentCase mc;
            mc.f = require(jm[i], "f", where).get<std::string>();
            mc.g = require(jm[i], "g", where).get<std::string>();
            mc.n_grid = parse_n_grid(require(jm[i], "n", where), where + ".n");
            mc.trend = jm[i].value("trend", false);
            mc.final_tol = jm[i].value("final_tol", 0.02);
            cfg.moments.push_back(std::move(mc));
        }
    }
    if (j.contains("mean")) {
        const json& jm = require(j["mean"], "cases", "mean");
        for (std::size_t i = 0; i < jm.size(); ++i) {
            const std::string where = "mean.cases[" + std::to_string(i) + "]";
            MeanCase mc;
            mc.f = require(jm[i], "f", where).get<std::string>();
            mc.n = require(jm[i], "n", where).get<std::int64_t>();
            if (mc.n < 1) fail(where, "n must be >= 1");
            cfg.means.push_back(std::move(mc));
        }
    }
    if (j.contains("diagram")) {
        const json& jd = j["diagram"];
        cfg.diagram.n = jd.value("n", cfg.diagram.n);
        cfg.diagram.realizations = jd.value("realizations", cfg.diagram.realizations);
        cfg.diagram.k_max = jd.value("k_max", cfg.diagram.k_max);
        cfg.diagram.pairs_per_order = jd.value("pairs_per_order", cfg.diagram.pairs_per_order);
        cfg.diagram.tolerance = jd.value("tolerance", cfg.diagram.tolerance);
        if (cfg.diagram.k_max < 1 || cfg.diagram.k_max > 4)
            fail("diagram.k_max", "supported range is 1..4 (term-count guard)");
    }
    if (j.contains("flimits")) {
        FlimitsConfig fc;
        const json& jf = j["flimits"];
        fc.n_grid = parse_n_grid(require(jf, "n_grid", "flimits"), "flimits.n_grid");
        const json& jc = require(jf, "cases", "flimits");
        for (std::size_t i = 0; i < jc.size(); ++i) {
            const std::string where = "flimits.cases[" + std::to_string(i) + "]";
            FlimitCase c;
            c.f = require(jc[i], "f", where).get<std::string>();
            c.g = require(jc[i], "g", where).get<std::string>();
            c.l = require(jc[i], "l", where).get<int>();
            fc.cases.push_back(std::move(c));
        }
        cfg.flimits = std::move(fc);
    }
    if (j.contains("converge")) {
        ConvergeConfig cc;
        const json& jc = j["converge"];
        cc.chaos = require(jc, "chaos", "converge").get<std::string>();
        cc.n_grid = parse_n_grid(require(jc, "n_grid", "converge"), "converge.n_grid");
        cc.replicates_per_side = jc.value("replicates_per_side", cc.replicates_per_side);
        cc.min_final_p = jc.value("min_final_p", cc.min_final_p);
        if (cc.replicates_per_side < 2) fail("converge.replicates_per_side", "must be >= 2");
        cfg.converge = std::move(cc);
    }
    if (j.contains("gaussianity")) {
        GaussianityConfig gc;
        const json& jg = j["gaussianity"];
        const json& js = require(jg, "set", "gaussianity");
        for (std::size_t i = 0; i < js.size(); ++i)
            gc.set.push_back(parse_interval(js[i], "gaussianity.set[" + std::to_string(i) + "]"));
        gc.n = jg.value("n", gc.n);
        gc.replicates = jg.value("replicates", gc.replicates);
        if (gc.replicates < 1000) fail("gaussianity.replicates", "must be >= 1000");
        cfg.gaussianity = std::move(gc);
    }

    // referenced names must resolve
    for (const MomentCase& mc : cfg.moments) {
        cfg.integrand(mc.f);
        cfg.integrand(mc.g);
    }
    for (const MeanCase& mc : cfg.means) cfg.integrand(mc.f);
    if (cfg.flimits) {
        for (const FlimitCase& c : cfg.flimits->cases) {
            cfg.integrand(c.f);
            cfg.integrand(c.g);
        }
    }
    if (cfg.converge) cfg.chaos(cfg.converge->chaos);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_json(buf.str(), path);
}

}  // namespace ewc
