#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "umdlab/martingale.hpp"
#include "umdlab/multipliers.hpp"
#include "umdlab/spaces.hpp"

namespace umdlab {

enum class ExperimentKind { IdentityCheck, BellmanSweep, CounterexampleSweep, PropertySuite };

const char* to_string(ExperimentKind k);
ExperimentKind kind_from_string(const std::string& s);

// frozen value for one row; params must be a subset of the row's params
struct Reference {
    std::string quantity;
    nlohmann::json params = nlohmann::json::object();
    double value = 0.0;
    double tol = 1e-6;
};

struct ExperimentConfig {
    std::string id = "experiment";
    ExperimentKind kind = ExperimentKind::PropertySuite;
    std::vector<Scalar> A{-1.0, 1.0};
    double p = 2.0;
    int d = 2;
    double alpha = 2.0;
    std::vector<int> depths;
    std::vector<int> resolutions;  // torus N, or Bellman M for BellmanSweep
    int restarts = 8;
    std::uint64_t seed = 0;
    SpaceSpec space = SpaceSpec::scalar();
    // Bellman
    double half_width = 4.0;
    double bisection_width = 1e-2;
    // PropertySuite; empty = the symbol-set and martingale invariants
    std::vector<std::string> properties;
    std::vector<Reference> references;
    std::string output_dir;  // not part of the cache key
    std::string format = "csv";

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    void validate() const;  // throws std::invalid_argument
};

// Single object or {"experiments": [...]}
std::vector<ExperimentConfig> load_configs(const std::filesystem::path& file);
std::vector<ExperimentConfig> parse_configs(const nlohmann::json& j);

struct ReportRow {
    std::string experiment_id;
    std::string quantity;
    std::string method;  // martingale | bellman | fft | analytic
    double value = 0.0;
    std::string params_json = "{}";
    double wall_ms = 0.0;
};

// quantity "verdict:<name>", method analytic, value 1 = PASS, 0 = FAIL
inline constexpr const char* kVerdictPrefix = "verdict:";

struct Report {
    std::vector<ReportRow> rows;

    void append(const Report& other) { rows.insert(rows.end(), other.rows.begin(), other.rows.end()); }
    bool all_pass() const;
    std::vector<std::string> failures() const;
};

// Closed-form sandwich constants. The UMD constant of X is known
// (p*-1) for the scalars and for l^q_n with q between 2 and p.
std::optional<double> known_umd_constant(const SpaceSpec& space, double p);
struct AnalyticBounds {
    std::optional<double> lower, upper;
};
AnalyticBounds analytic_bounds(const std::vector<Scalar>& A, const SpaceSpec& space, double p);

Report run_identity_check(const ExperimentConfig& c);
Report run_bellman_sweep(const ExperimentConfig& c);
Report run_counterexample_sweep(const ExperimentConfig& c);
Report run_property_suite(const ExperimentConfig& c);
Report run_experiment(const ExperimentConfig& c);
// experiments in parallel, rows in config order
Report run_batch(const std::vector<ExperimentConfig>& cs);

// one representative per symbol family, all on d = 2
std::vector<std::pair<std::string, SymbolSpec>> shipped_symbols();

std::vector<std::string> property_names();          // everything
std::vector<std::string> default_property_names();  // symbol-set and martingale invariants

void write_csv(const Report& r, std::ostream& os);
void write_json(const Report& r, std::ostream& os);
void emit(const Report& r, const std::filesystem::path& file, const std::string& format);
Report report_from_json(const nlohmann::json& j);

// timing off: wall_ms = 0 for byte-identical reruns
void set_timing_enabled(bool on);
bool timing_enabled();

// sorted keys, normalized numbers, output location dropped
std::string canonical_config(const ExperimentConfig& c);
std::uint64_t config_hash(const ExperimentConfig& c);
std::optional<Report> cache_lookup(const std::filesystem::path& cache_dir, const ExperimentConfig& c);
void cache_store(const std::filesystem::path& cache_dir, const ExperimentConfig& c, const Report& r);

// space, depth, per-level slot values, plan, ratio
nlohmann::json witness_json(const BetaEstimate& e);
std::pair<MartingaleTree, CoefficientPlan> witness_from_json(const nlohmann::json& j);

nlohmann::json space_json(const SpaceSpec& s);
SpaceSpec space_from_json(const nlohmann::json& j);

}  // namespace umdlab
