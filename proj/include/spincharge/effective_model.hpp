#pragma once

// Quantum-optics knobs -> two-component Lieb-Liniger / Luttinger parameters.
//
// Units: Γ = 1 sets the frequency unit and ħ = 1. Index 0 is field 1 / species a,
// index 1 is field 2 / species b. Field 1 is stored in species a and field 2 in
// species b.

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace spincharge {

using Pair = std::array<double, 2>;

enum class SignPolicy {
    repulsive_only, ///< reject non-positive masses and intra-species couplings
    unchecked,      ///< evaluate formulas without sign checks
};

struct QuantumOpticsConfig {
    Pair delta2{};        ///< |1>-|2> detuning per species [Γ]
    Pair delta4{};        ///< |3>-|4> detuning per species [Γ]
    Pair rabi{};          ///< control-field Rabi frequency per field [Γ]
    /// coupling[field][species]
    std::array<Pair, 2> coupling{};
    Pair atom_density{};  ///< n_z per species [atoms/length]
    double gamma_total = 1.0;
    std::optional<Pair> gamma_1d;      ///< per species [Γ]
    std::optional<Pair> cooperativity; ///< η = Γ_1D/Γ per species
    Pair bare_velocity{}; ///< empty-waveguide velocity per field
    Pair photon_number{}; ///< N_ph per field
    Pair pulse_width{};   ///< z0 per field
    std::optional<Pair> optical_depth; ///< OD = η·n_z·z0 per species
    double gamma0 = 1.0;  ///< prefactor of the loss-limited γ bound
    double beta = 1.0;    ///< exponent scale of the loss-limited γ bound
    SignPolicy sign_policy = SignPolicy::repulsive_only;

    bool operator==(const QuantumOpticsConfig&) const = default;
};

/// Validates the invariants and fills Γ_1D, η and OD from one another.
/// The returned config has all three optionals engaged.
QuantumOpticsConfig resolve(const QuantumOpticsConfig& config);

struct EffectiveModel {
    Pair mass{};
    Pair intra{};
    double v1 = 0.0;
    double v2 = 0.0;
    double v12 = 0.0; ///< always v1 + v2
    Pair density{};   ///< ρ0 per component
    Pair group_velocity{};
    Pair mixing_angle{}; ///< θ per species [rad]

    bool operator==(const EffectiveModel&) const = default;
};

/// Assembles a model from directly given Lieb-Liniger parameters.
EffectiveModel direct_model(Pair mass, Pair intra, double v1, double v2, Pair density);

struct ComponentLuttinger {
    double u = 0.0;
    double K = 0.0;
    double gamma = 0.0;
};

struct SpinChargeVelocities {
    double charge = 0.0;
    double spin = 0.0;
};

enum class SeparationStatus { separated, unmatched };

struct LuttingerParams {
    Pair u{};
    Pair K{};
    Pair gamma{};
    /// Only engaged for matched components (u1 = u2, K1 = K2).
    std::optional<SpinChargeVelocities> velocities;
    SeparationStatus status = SeparationStatus::unmatched;
};

enum class ValidityStatus { pass, warn, fail };

std::string to_string(ValidityStatus status);

struct ValidityEntry {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    double pass_threshold = 0.01;
    double warn_threshold = 0.1;
    ValidityStatus status = ValidityStatus::pass;
};

struct ValidityReport {
    std::vector<ValidityEntry> entries;
    ValidityStatus overall = ValidityStatus::pass;

    const ValidityEntry* find(const std::string& name) const;
    /// Largest ratio/pass_threshold over all entries, 0 when empty.
    double worst_normalized_ratio() const;
};

/// Grades ratio = lhs/rhs against the entry thresholds.
ValidityEntry grade(std::string name, double lhs, double rhs, double pass_threshold = 0.01,
                    double warn_threshold = 0.1);

double mixing_angle(double coupling, double atom_density, double rabi);

/// ν_g = ν·Ω²/(π·g²·n_z). Ω = 0 is admitted as the stopped-light limit.
double group_velocity(double bare_velocity, double rabi, double coupling, double atom_density);

/// m = -Γ_1D·n_z / (4·Δ2·ν_g); positive iff Δ2 < 0.
double effective_mass(double delta2, double group_velocity, double gamma_1d, double atom_density,
                      SignPolicy policy = SignPolicy::repulsive_only);

/// U = Γ_1D·ν_g / (2·Δ4); positive iff Δ4 > 0.
double intra_repulsion(double gamma_1d, double group_velocity, double delta4,
                       SignPolicy policy = SignPolicy::repulsive_only);

struct InterSpecies {
    double v1 = 0.0;
    double v2 = 0.0;
    double v12 = 0.0;
};

InterSpecies inter_repulsion(const QuantumOpticsConfig& config);

ComponentLuttinger luttinger_params(double density, double intra, double mass);

/// u_{c,s} = u·sqrt(1 ± v12·K/(π·u)). Throws DemixingInstability when the
/// spin radicand is not positive.
SpinChargeVelocities spin_charge_velocities(double u, double K, double v12);

/// Loss-limited bound min(γ0·exp(β|Δ2|/Γ), η·β·(Γ/|Δ2|)·OD/N_ph).
double gamma_max(double gamma0, double beta, double delta2_abs, double gamma_total, double eta,
                 double optical_depth, double photon_number);

struct Delta2Optimum {
    double delta2_abs = 0.0;
    double gamma = 0.0;
    bool interior = false; ///< true when the two bound branches cross inside the interval
};

/// Maximizes gamma_max over |Δ2| in [lo, hi].
Delta2Optimum optimize_delta2(double gamma0, double beta, double gamma_total, double eta,
                              double optical_depth, double photon_number, double lo, double hi);

/// Transparency-window, spin-wavevector and slow-light conditions for
/// photon line densities n (per component).
ValidityReport validity_check(Pair n, const QuantumOpticsConfig& config);

struct ModelBundle {
    QuantumOpticsConfig config; ///< resolved
    EffectiveModel model;
    LuttingerParams luttinger;
    ValidityReport validity;
    Pair gamma_max{}; ///< depends on the γ0, β inputs
};

/// Luttinger quantities for an already-assembled model. Unmatched components
/// leave the charge/spin velocities disengaged.
LuttingerParams derive_luttinger(const EffectiveModel& model);

ModelBundle build_effective_model(const QuantumOpticsConfig& config);

} // namespace spincharge
