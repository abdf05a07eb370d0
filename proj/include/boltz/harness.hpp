#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "boltz/event_chain.hpp"
#include "boltz/lattice.hpp"
#include "boltz/lattice_samplers.hpp"
#include "boltz/observables.hpp"
#include "boltz/particles.hpp"

namespace boltz {

inline constexpr const char* software_version = "0.1.0";

enum class InitialState { Auto, Ordered, Disordered };

struct ExperimentConfig {
    // model
    bool lattice = true;
    LatticeSpec lattice_spec;
    ParticleSpec<double> particle_spec;
    std::optional<double> eta;  // fixes the box side when set

    // sampler
    std::string sampler;
    SingleSiteOptions single_site;
    double eps_move = 0.1;
    int max_attempts = 1000;
    double duration = 0;  // per sample; 0 picks the sampler default
    SmoothEcmcOptions ecmc;

    // schedule
    std::size_t burn_in = 0;  // in recorded-sample units
    std::size_t samples = 1;
    std::size_t stride = 1;
    std::size_t chains = 1;
    std::uint64_t master_seed = 0;
    InitialState init = InitialState::Auto;

    // sweep
    std::string sweep_parameter;  // "", "beta" or "eta"
    std::vector<double> sweep_values;

    // output
    std::filesystem::path directory = "out";
    bool snapshots = false;

    /// Every key as given, "section.key" -> text; written to the manifest.
    std::map<std::string, std::string> raw;

    std::size_t grid_size() const { return sweep_values.empty() ? 1 : sweep_values.size(); }
    std::size_t planned_runs() const { return grid_size() * chains; }
    TimeUnit time_unit() const;
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;  ///< "section.key: message"
};

/// INI text with sections [model] [sampler] [schedule] [sweep] [output]; all errors are collected.
ParseResult parse_config(const std::string& text);

/// The INI text embedded in a manifest.
std::string config_from_manifest(const std::string& manifest_text);

struct PlannedRun {
    std::size_t grid_index = 0;
    std::size_t chain = 0;
    double parameter = 0;
    std::uint64_t seed = 0;
};

std::vector<PlannedRun> plan_runs(const ExperimentConfig& cfg);

struct ChainOutcome {
    PlannedRun run;
    bool ok = true;
    std::string error;
    double start_time = 0;
    double end_time = 0;
    std::string series_csv;
    std::string snapshot_csv;
};

/// Executes one planned chain entirely in memory.
ChainOutcome run_chain(const ExperimentConfig& cfg, const PlannedRun& run);

struct RunManifest {
    std::string text;
    std::vector<ChainOutcome> chains;
};

/// Runs every planned chain with up to `workers` threads (0 reads BOLTZ_WORKERS) and
/// writes series CSVs and manifest.txt into cfg.directory.
RunManifest run_experiment(const ExperimentConfig& cfg, unsigned workers = 0);

std::string series_file_name(std::size_t grid_index, std::size_t chain);
std::string snapshot_file_name(std::size_t grid_index, std::size_t chain);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

/// Estimator table for an output directory: run, parameter, observable, value, stderr, time_unit, n_chains.
/// Observables: energy, abs_m, specific_heat, iat_abs_m, pressure.
std::string analyze(const std::filesystem::path& directory, const std::string& observable);

/// Reference curves: onsager_c, m0 (grid in beta_c / beta) and ising1d_f (grid in beta).
std::string reference_curve(const std::string& curve, const std::vector<double>& grid, int n = 64, double J = 1,
                            double h = 0);

/// "a:b:n" inclusive linear grid, or a comma-separated list.
std::vector<double> parse_grid(const std::string& text);

}  // namespace boltz
