#pragma once

// Split-step spectral integrator for the coupled two-component NLS
//
//   i ∂t ψ1 = -(1/2m1) ∂z² ψ1 + (U1 |ψ1|² + V12 |ψ2|²) ψ1
//   i ∂t ψ2 = -(1/2m2) ∂z² ψ2 + (U2 |ψ2|² + V12 |ψ1|²) ψ2
//
// on a periodic grid, generated by H = ∫ Σi [|∂zψi|²/2mi + Ui ρi²/2] + V12 ρ1 ρ2.

#include "spincharge/effective_model.hpp"
#include "spincharge/fft.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spincharge {

class Grid {
public:
    /// n must be a power of two ≥ 16; length > 0.
    Grid(std::size_t points, double length);

    std::size_t points() const { return points_; }
    double length() const { return length_; }
    double spacing() const { return length_ / static_cast<double>(points_); }
    double position(std::size_t j) const { return static_cast<double>(j) * spacing(); }

    /// Wavenumber of FFT bin j (FFT ordering: 0, 1, ..., n/2-1, -n/2, ..., -1).
    double wavenumber(std::size_t j) const;
    /// Signed displacement folded into [-L/2, L/2).
    double wrap(double displacement) const;

    bool operator==(const Grid&) const = default;

private:
    std::size_t points_;
    double length_;
};

struct FieldState {
    std::vector<Complex> psi1;
    std::vector<Complex> psi2;
    double time = 0.0;
};

/// Σ |ψ|² dz.
double norm(const Grid& grid, std::span<const Complex> psi);

enum class InitMode { vacuum, pulse, background_plus_bump };

struct ComponentInit {
    InitMode mode = InitMode::vacuum;
    double center = 0.0;
    double width = 1.0;          ///< pulse z0: |ψ|² ∝ exp(-(z-c)²/(2 z0²))
    double photon_number = 0.0;  ///< pulse norm
    double density = 0.0;        ///< background ρ0 in bump mode
    double bump_fraction = 0.0;  ///< ε ≤ 0.05
    double bump_width = 1.0;

    bool operator==(const ComponentInit&) const = default;
};

std::vector<Complex> init_component(const Grid& grid, const ComponentInit& spec);
FieldState init_state(const Grid& grid, const ComponentInit& first, const ComponentInit& second);

struct Couplings {
    Pair intra{};
    double inter = 0.0;

    bool operator==(const Couplings&) const = default;
};

enum class Stage { inject, trap, ramp, hold, release };

std::string to_string(Stage stage);
Stage stage_from_string(const std::string& name);

struct StageSpec {
    Stage stage = Stage::hold;
    double duration = 0.0;
    /// Couplings reached at the end of a ramp stage. Other stages keep the
    /// couplings they start with.
    std::optional<Couplings> target;

    bool operator==(const StageSpec&) const = default;
};

struct StageMarker {
    Stage stage;
    double begin;
    double end;
};

/// Piecewise-linear coupling program with constant masses.
class RampSchedule {
public:
    RampSchedule(Pair masses, Couplings initial, std::vector<StageSpec> stages = {},
                 double start_time = 0.0);

    static RampSchedule constant(Pair masses, Couplings couplings);

    const Pair& masses() const { return masses_; }
    /// Couplings at time t; constant before the first and after the last stage.
    Couplings at(double t) const;
    const std::vector<StageMarker>& markers() const { return markers_; }
    double start_time() const { return start_time_; }
    double end_time() const;
    /// Stage active at t, or "static" outside all stages.
    std::string stage_at(double t) const;

private:
    Pair masses_;
    double start_time_;
    std::vector<StageMarker> markers_;
    std::vector<Couplings> knots_; ///< couplings at each marker boundary, size = markers + 1
};

struct Diagnostics {
    double norm1 = 0.0;
    double norm2 = 0.0;
    double energy = 0.0;
};

double energy(const Grid& grid, const FieldState& state, const Pair& masses,
              const Couplings& couplings);

/// Strang-split integrator with plans and phase tables reused across steps.
class SplitStepSolver {
public:
    SplitStepSolver(Grid grid, RampSchedule schedule);

    const Grid& grid() const { return grid_; }
    const RampSchedule& schedule() const { return schedule_; }

    /// Advances state by dt in place: half kinetic, full nonlinear at the
    /// midpoint couplings, half kinetic.
    void step(FieldState& state, double dt, std::size_t step_index = 0);

    /// Advances `steps` Strang steps, fusing the adjacent half kinetic steps
    /// between them. Agrees with repeated step() up to roundoff.
    void advance(FieldState& state, double dt, std::size_t steps, std::size_t first_index = 0);

    /// Largest nonlinear phase dt·(U|ψ|² + V|ψ'|²) accepted per step.
    static constexpr double max_phase_per_step = 0.1;

private:
    void prepare(double dt);
    void kinetic(std::vector<Complex>& psi, const std::vector<Complex>& phase);
    void nonlinear(FieldState& state, double dt, std::size_t step_index);

    Grid grid_;
    RampSchedule schedule_;
    Fft fft_;
    double prepared_dt_ = -1.0;
    std::vector<Complex> half_kick1_;
    std::vector<Complex> half_kick2_;
    std::vector<Complex> full_kick1_;
    std::vector<Complex> full_kick2_;
};

/// One Strang step; convenience wrapper that builds a solver.
FieldState step(const Grid& grid, const FieldState& state, const RampSchedule& schedule, double dt);

struct Trajectory {
    Grid grid{16, 1.0};
    Pair masses{};
    std::vector<double> times;
    std::vector<FieldState> snapshots;
    std::vector<Diagnostics> diagnostics;
    std::vector<StageMarker> stages;
    double dt = 0.0;
    std::size_t sample_every = 1;
    /// Energy change across ramp stages (E at ramp end - E at ramp start).
    std::optional<double> ramp_energy;
};

/// Integrates from state.time to t_final with fixed dt, sampling every
/// sample_every steps. The final state is always recorded.
Trajectory evolve(const Grid& grid, FieldState state, const RampSchedule& schedule, double t_final,
                  double dt, std::size_t sample_every);

/// Readout state: the last held snapshot.
FieldState release(const Trajectory& trajectory);

} // namespace spincharge
