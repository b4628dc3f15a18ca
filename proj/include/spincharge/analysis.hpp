#pragma once

#include "spincharge/dynamics.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace spincharge {

/// Per-sample component densities and their charge (sum) and spin
/// (difference) channels.
struct DensityWaves {
    Grid grid{16, 1.0};
    std::vector<double> times;
    std::vector<std::vector<double>> n1;
    std::vector<std::vector<double>> n2;
    std::vector<std::vector<double>> charge;
    std::vector<std::vector<double>> spin;
};

DensityWaves density_waves(const Trajectory& trajectory);

enum class Branch { charge, spin };

std::string to_string(Branch branch);

struct TrackWindow {
    double t_begin = 0.0;
    double t_end = std::numeric_limits<double>::infinity();
    /// Where the disturbance starts; defaults to the extremum of the first sample.
    std::optional<double> origin;
};

enum class FitMethod { front_tracking, spectral_slope };

std::string to_string(FitMethod method);

struct VelocityFit {
    Branch branch = Branch::charge;
    FitMethod method = FitMethod::front_tracking;
    double velocity = 0.0;
    /// RMS of the fit residuals divided by the fitted spread (or dz, if larger).
    double residual = 0.0;
    double t_begin = 0.0;
    double t_end = 0.0;
    std::vector<double> times;
    std::vector<double> positions;
};

/// Follows the rightward-moving extremum of the branch deviation from its
/// background and fits position against time.
VelocityFit track_fronts(const DensityWaves& waves, Branch branch, const TrackWindow& window);

enum class SpectralSource { psi1, psi2, charge, spin };
enum class Window { none, hann };

std::string to_string(SpectralSource source);
std::string to_string(Window window);
SpectralSource spectral_source_from_string(const std::string& name);
Window window_from_string(const std::string& name);

/// S(q, ω) on ascending q and ω grids; intensity is row-major [q][ω].
struct SpectralMap {
    std::vector<double> q;
    std::vector<double> omega;
    std::vector<double> intensity;
    SpectralSource source = SpectralSource::psi1;
    Window window = Window::none;
    /// ω is measured relative to this frequency.
    double reference_frequency = 0.0;

    double at(std::size_t iq, std::size_t iw) const { return intensity[iq * omega.size() + iw]; }
    std::size_t nearest_q(double value) const;
};

/// S(q, ω) = |Σ_{z,t} w(t) f(z,t) e^{-i(qz - ωt)}|² / (Nz·Nt), with f the
/// chosen field after removing its space-time mean. Field sources are
/// demodulated by e^{+i·reference_frequency·t} first.
SpectralMap spectral_function(const Trajectory& trajectory, SpectralSource source,
                              Window window = Window::hann, double reference_frequency = 0.0);

/// Rotation frequency μ of the spatial mean of ψ_component ∝ e^{-iμt}.
double condensate_frequency(const Trajectory& trajectory, int component);

struct Peak {
    double omega = 0.0;
    double intensity = 0.0;
    double prominence = 0.0;
    std::size_t bin = 0;
};

struct PeakOptions {
    double prominence_fraction = 0.05;
    double omega_min = -std::numeric_limits<double>::infinity();
    double omega_max = std::numeric_limits<double>::infinity();
};

struct PeakCut {
    double q_requested = 0.0;
    double q = 0.0;        ///< snapped bin
    double q_offset = 0.0; ///< q - q_requested
    std::vector<Peak> peaks; ///< ascending ω
};

PeakCut peak_positions(const SpectralMap& map, double q, const PeakOptions& options = {});

struct SpectralVelocities {
    VelocityFit charge;
    VelocityFit spin;
    std::vector<double> q_used;
    std::vector<double> charge_omega;
    std::vector<double> spin_omega;
};

struct SlopeOptions {
    double q_min = 0.0;
    double q_max = std::numeric_limits<double>::infinity();
    /// Peaks closer than this many ω bins (to each other or to ω = 0) count as merged.
    double min_bin_separation = 3.0;
    double prominence_fraction = 0.05;
};

/// Regresses the two dominant positive-ω peaks against q through the origin;
/// the faster branch is labeled charge.
SpectralVelocities velocities_from_spectrum(const SpectralMap& map, const SlopeOptions& options = {});

} // namespace spincharge
