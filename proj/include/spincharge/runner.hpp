#pragma once

// Staged experiment: model -> validity -> evolve -> release -> analyses -> artifacts.

#include "spincharge/config.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace spincharge {

struct RunOptions {
    std::optional<std::filesystem::path> out_dir; ///< overrides output.directory
    std::optional<double> dt;
    bool allow_invalid = false;
    std::optional<OutputFormat> format;
    bool map_only = false;
    /// Skip bulky field and spectrum files (sweep points).
    bool reduced = false;
};

struct RunScalars {
    std::optional<Pair> gamma_max;
    std::optional<double> u_charge;
    std::optional<double> u_spin;
    std::optional<double> analytic_ratio;
    std::optional<double> front_charge;
    std::optional<double> front_spin;
    std::optional<double> front_ratio;
    std::optional<double> peak_ratio;
    std::optional<double> spectral_charge;
    std::optional<double> spectral_spin;
    std::optional<double> spectral_ratio;
    double worst_validity_ratio = 0.0;
    std::string validity_status = "pass";
    std::optional<double> ramp_energy;
};

struct RunManifest {
    nlohmann::json document;
    std::filesystem::path path;
    std::string status; ///< ok, invalid, failed
    int exit_code = 0;
    RunScalars scalars;
};

/// Exit code for an error: 1 for configuration/parameter problems, 3 for
/// numerical and analysis failures.
int exit_code_for(const std::exception& error);

/// Runs the configured pipeline and writes every artifact plus manifest.json.
/// A validity failure returns exit code 2 (unless allowed) without running the
/// dynamics. Module errors are rethrown with the stage name prefixed, after a
/// manifest with a failure marker has been written.
RunManifest run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

enum class PlotTarget { densities, spectrum, cut };

PlotTarget plot_target_from_string(const std::string& name);

/// Writes a CSV slice next to the manifest. `q` is only used by the cut target
/// (default: the detection wavenumber 2π/z0 recorded in the manifest) and is in
/// the units of the exported spectrum.
std::filesystem::path emit_plot_data(const std::filesystem::path& manifest, PlotTarget target,
                                     std::optional<double> q = {},
                                     std::optional<std::filesystem::path> out = {});

} // namespace spincharge
