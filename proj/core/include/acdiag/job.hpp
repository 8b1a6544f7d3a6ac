#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acdiag/extension.hpp"
#include "acdiag/funcspace.hpp"

namespace acdiag::job {

enum class Command { Extend, Extract, Analyze, Roundtrip, Demo };

Command command_from_name(const std::string& name);
std::string command_name(Command c);

/// The diagonal map: either a closed-form expression per coordinate or an
/// explicit stage list with declared tail bounds.
struct GSpec {
    std::vector<std::string> exprs;        // one per target coordinate
    std::vector<std::string> stage_exprs;  // scalar stages (dim 1)
    std::vector<double> stage_tails;       // declared tails, one per stage

    bool is_series() const { return !stage_exprs.empty(); }
    bool present() const { return !exprs.empty() || is_series(); }
};

struct JobConfig {
    Command command = Command::Demo;
    std::string demo = "step";  // step | xsin | weierstrass | pseudonorm

    Interval domain = Interval::closed(0.0, 1.0);
    NormedTarget target = NormedTarget::l2(1);
    GSpec g;
    std::vector<std::string> surface_exprs;  // bivariate, one per coordinate

    int n_max = 20;
    int levels = 12;
    double diagonal_tol = 1e-9;
    double roundtrip_tol = 1e-6;
    double eps_coeff = 1.0;
    double eps_ratio = 0.5;

    int surface_csv_points = 65;  // per axis
    int diagonal_points = 1000;
    int extract_samples = 257;
    int roundtrip_samples = 100;
    std::size_t variation_points = 100'001;
    std::size_t ac_cells = 20'000;
    int sections = 10;
    std::vector<double> modulus_eps = {0.5, 0.1, 0.02};

    double pseudo_p = 0.5;
    std::vector<double> pseudo_scales = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir = "out";

    void validate() const;
};

/// Reads a config from a JSON document; unknown keys are rejected.
JobConfig config_from_json_text(const std::string& text);
JobConfig config_from_json_file(const std::string& path);

/// Built-in demo configurations.
JobConfig demo_config(const std::string& name);

/// Applies ACDIAG_* environment overrides for every scalar config key:
/// COMMAND, DEMO, OUT, SEED, THREADS, N_MAX, LEVELS, SECTIONS, SURFACE_CSV,
/// DIAGONAL_POINTS, EXTRACT_SAMPLES, ROUNDTRIP_SAMPLES, VARIATION_POINTS,
/// AC_CELLS, DIAGONAL_TOL, ROUNDTRIP_TOL, EPS_COEFF, EPS_RATIO, PSEUDO_P.
void apply_env_overrides(JobConfig& cfg);

/// Builds the evaluable maps declared by the config.
ContinuousMap make_univariate(const std::vector<std::string>& exprs,
                              const NormedTarget& target);
BivariateMap make_bivariate(const std::vector<std::string>& exprs,
                            const NormedTarget& target);
BaireSeries make_declared_series(const GSpec& g, const Interval& domain,
                                 const NormedTarget& target);

extension::ExtensionSurface build_from_config(const JobConfig& cfg);

/// Runs the job, writing report files under cfg.out_dir. Exit status: 0 on
/// success, 1 on configuration errors, 2 on numerical/domain failures.
int run(const JobConfig& cfg);

}  // namespace acdiag::job
