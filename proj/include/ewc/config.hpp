#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ewc/integrand.hpp"
#include "ewc/schedule.hpp"

namespace ewc {

// Config/schema problems; the CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct KRule {
    double c = 2.0;
    double epsilon = 0.5;
};

struct MomentCase {
    std::string f;
    std::string g;
    std::vector<std::int64_t> n_grid;
    bool trend = false;        // require |mean - limit| decreasing over n_grid
    double final_tol = 0.02;   // final estimate within max(4 SE, final_tol) of the limit
};

struct MeanCase {
    std::string f;
    std::int64_t n = 0;
};

struct DiagramCheckConfig {
    std::int64_t n = 500;
    std::int64_t realizations = 100;
    int k_max = 3;
    int pairs_per_order = 5;
    double tolerance = 1e-9;
};

struct FlimitCase {
    std::string f;
    std::string g;
    int l = 0;
};

struct FlimitsConfig {
    std::vector<FlimitCase> cases;
    std::vector<std::int64_t> n_grid;
};

struct ConvergeConfig {
    std::string chaos;
    std::vector<std::int64_t> n_grid;
    std::int64_t replicates_per_side = 2000;
    double min_final_p = 0.005;
};

struct GaussianityConfig {
    std::vector<Interval> set;  // union of intervals, becomes the count grid
    std::int64_t n = 1'000'000;
    std::int64_t replicates = 100'000;
};

struct ExperimentConfig {
    TriangularArraySchedule schedule = TriangularArraySchedule::standard();
    std::map<std::string, CellwiseFunction> integrands;
    std::map<std::string, ChaosVector> chaos_vectors;

    std::vector<std::int64_t> n_grid;
    std::int64_t replicates = 100'000;
    std::uint64_t master_seed = 42;
    KRule k_rule;
    std::int64_t n0 = 1;
    std::string out_dir = "results";
    std::vector<std::string> checks;

    std::vector<MomentCase> moments;
    std::vector<MeanCase> means;
    DiagramCheckConfig diagram;
    std::optional<FlimitsConfig> flimits;
    std::optional<ConvergeConfig> converge;
    std::optional<GaussianityConfig> gaussianity;

    // runtime knobs (CLI flags)
    int threads = 0;  // 0 = hardware concurrency
    bool dump_counts = false;
    bool dump_gaussians = false;

    const CellwiseFunction& integrand(const std::string& name) const;
    const ChaosVector& chaos(const std::string& name) const;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config_json(const std::string& text, const std::string& origin);

}  // namespace ewc
