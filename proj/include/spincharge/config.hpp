#pragma once

// Experiment configuration document (JSON). Every object rejects unknown keys.
//
// Top-level keys: exactly one of "quantum_optics" / "model"; optional "grid",
// "initial", "schedule", "integration", "analysis", "output", "seed",
// "allow_invalid". Dynamics run only when "grid" is present.

#include "spincharge/analysis.hpp"
#include "spincharge/dynamics.hpp"
#include "spincharge/effective_model.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spincharge {

/// Lieb-Liniger parameters given directly instead of derived.
struct DirectModelSpec {
    Pair mass{1.0, 1.0};
    Pair intra{};
    double v1 = 0.0;
    double v2 = 0.0;
    Pair density{};

    bool operator==(const DirectModelSpec&) const = default;
};

struct GridSpec {
    std::size_t points = 1024;
    double length = 1.0;

    bool operator==(const GridSpec&) const = default;
};

/// Initial field for one component; unset fields are filled from the model
/// (pulse width and photon number, background density) or the grid centre.
struct InitSpec {
    InitMode mode = InitMode::pulse;
    std::optional<double> center;
    std::optional<double> width;
    std::optional<double> photon_number;
    std::optional<double> density;
    double bump_fraction = 0.0;
    std::optional<double> bump_width;

    bool operator==(const InitSpec&) const = default;
};

struct ScheduleSpec {
    /// Couplings at t = 0; defaults to the model couplings.
    std::optional<Couplings> initial;
    /// Ramp stages without a target ramp to the model couplings.
    std::vector<StageSpec> stages;

    bool operator==(const ScheduleSpec&) const = default;
};

struct IntegrationSpec {
    double dt = 1e-3;
    /// Defaults to the schedule end time.
    std::optional<double> t_final;
    std::size_t sample_every = 10;

    bool operator==(const IntegrationSpec&) const = default;
};

struct FrontsRequest {
    double t_begin = 0.0;
    std::optional<double> t_end;
    std::optional<double> origin;

    bool operator==(const FrontsRequest&) const = default;
};

struct SpectrumRequest {
    SpectralSource source = SpectralSource::psi1;
    Window window = Window::hann;
    /// Demodulation frequency; unset means estimated from the condensate phase.
    std::optional<double> reference_frequency;
    /// Only |q| ≤ export_q_max is written to the spectrum CSV.
    std::optional<double> export_q_max;

    bool operator==(const SpectrumRequest&) const = default;
};

struct PeaksRequest {
    /// Cut positions; empty means q = 2π/z0.
    std::vector<double> q;
    double prominence = 0.05;
    /// Lower ω bound of the peak search; unset searches the full axis.
    std::optional<double> omega_min = 0.0;

    bool operator==(const PeaksRequest&) const = default;
};

struct SlopesRequest {
    std::optional<double> q_min;
    /// Defaults to 1/(4ξ) with ξ the healing length of the slower branch.
    std::optional<double> q_max;
    double min_bin_separation = 3.0;

    bool operator==(const SlopesRequest&) const = default;
};

struct AnalysisSpec {
    /// Pulse length setting the detection wavenumber 2π/z0; defaults to the
    /// first pulse width of the quantum-optics block.
    std::optional<double> z0;
    /// Export q in π/z0 and ω in (π/z0)·2·sqrt(2/5)·u.
    bool figure_units = false;
    std::optional<FrontsRequest> fronts;
    std::optional<SpectrumRequest> spectrum;
    std::optional<PeaksRequest> peaks;
    std::optional<SlopesRequest> slopes;

    bool operator==(const AnalysisSpec&) const = default;
};

enum class OutputFormat { csv, binary };

std::string to_string(OutputFormat format);
OutputFormat output_format_from_string(const std::string& name);

struct OutputSpec {
    std::string directory = "out";
    OutputFormat format = OutputFormat::csv;
    bool trajectory = true;
    bool densities = true;
    bool spectrum = true;

    bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
    std::optional<QuantumOpticsConfig> quantum_optics;
    std::optional<DirectModelSpec> model;
    std::optional<GridSpec> grid;
    std::array<InitSpec, 2> initial{};
    std::optional<ScheduleSpec> schedule;
    IntegrationSpec integration;
    AnalysisSpec analysis;
    OutputSpec output;
    std::uint64_t seed = 0; ///< reserved; the pipeline is deterministic
    bool allow_invalid = false;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates a configuration document. Throws ConfigError with the
/// parse position or the offending key path.
ExperimentConfig load_config(const std::string& document);
ExperimentConfig load_config(const nlohmann::json& document);
ExperimentConfig load_config_file(const std::string& path);

/// Inverse of load_config: load_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& config);

} // namespace spincharge
