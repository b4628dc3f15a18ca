#include "spincharge/dynamics.hpp"

#include "spincharge/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace spincharge {

namespace {

constexpr double pi = std::numbers::pi;

double periodic_gaussian(const Grid& grid, std::size_t j, double center, double two_sigma_sq) {
    const double d = grid.wrap(grid.position(j) - center);
    return std::exp(-d * d / two_sigma_sq);
}

double energy_with(Fft& fft, const Grid& grid, const FieldState& state, const Pair& masses,
                   const Couplings& couplings) {
    const std::size_t n = grid.points();
    const double dz = grid.spacing();
    std::vector<Complex> work;
    double kinetic = 0.0;
    const std::vector<Complex>* fields[2] = {&state.psi1, &state.psi2};
    for (int c = 0; c < 2; ++c) {
        work = *fields[c];
        fft.forward(work);
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double k = grid.wavenumber(j);
            sum += k * k * std::norm(work[j]);
        }
        // Parseval: Σ_z |∂zψ|² dz = (dz/n) Σ_k k² |ψ_k|².
        kinetic += sum * dz / static_cast<double>(n) / (2.0 * masses[c]);
    }
    double interaction = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double n1 = std::norm(state.psi1[j]);
        const double n2 = std::norm(state.psi2[j]);
        interaction += 0.5 * couplings.intra[0] * n1 * n1 + 0.5 * couplings.intra[1] * n2 * n2 +
                       couplings.inter * n1 * n2;
    }
    return kinetic + interaction * dz;
}

Diagnostics diagnose(Fft& fft, const Grid& grid, const FieldState& state, const RampSchedule& schedule) {
    return {norm(grid, state.psi1), norm(grid, state.psi2),
            energy_with(fft, grid, state, schedule.masses(), schedule.at(state.time))};
}

} // namespace

Grid::Grid(std::size_t points, double length) : points_(points), length_(length) {
    if (points < 16 || !std::has_single_bit(points)) {
        std::ostringstream os;
        os << "grid points must be a power of two >= 16, got " << points;
        throw DomainError(os.str());
    }
    if (!(length > 0.0) || !std::isfinite(length)) {
        throw DomainError("grid length must be positive and finite");
    }
}

double Grid::wavenumber(std::size_t j) const {
    const auto n = static_cast<std::ptrdiff_t>(points_);
    auto idx = static_cast<std::ptrdiff_t>(j);
    if (idx >= n / 2) idx -= n;
    return 2.0 * pi * static_cast<double>(idx) / length_;
}

double Grid::wrap(double displacement) const {
    double d = std::fmod(displacement + 0.5 * length_, length_);
    if (d < 0.0) d += length_;
    return d - 0.5 * length_;
}

double norm(const Grid& grid, std::span<const Complex> psi) {
    double sum = 0.0;
    for (const auto& v : psi) sum += std::norm(v);
    return sum * grid.spacing();
}

std::vector<Complex> init_component(const Grid& grid, const ComponentInit& spec) {
    const std::size_t n = grid.points();
    std::vector<Complex> psi(n, Complex{0.0, 0.0});
    switch (spec.mode) {
    case InitMode::vacuum:
        break;
    case InitMode::pulse: {
        if (!(spec.width > 0.0) || spec.width >= grid.length() / 4.0) {
            throw DomainError("pulse width must lie in (0, L/4)");
        }
        if (!(spec.photon_number > 0.0)) throw DomainError("pulse photon number must be positive");
        // |ψ|² ∝ exp(-(z-c)²/(2 z0²)), i.e. ψ ∝ exp(-(z-c)²/(4 z0²)).
        const double two_sigma_sq = 4.0 * spec.width * spec.width;
        for (std::size_t j = 0; j < n; ++j) psi[j] = periodic_gaussian(grid, j, spec.center, two_sigma_sq);
        const double scale = std::sqrt(spec.photon_number / norm(grid, psi));
        for (auto& v : psi) v *= scale;
        break;
    }
    case InitMode::background_plus_bump: {
        if (spec.density < 0.0) throw DomainError("background density must be non-negative");
        if (spec.bump_fraction < 0.0 || spec.bump_fraction > 0.05) {
            throw DomainError("bump fraction must lie in [0, 0.05]");
        }
        if (!(spec.bump_width > 0.0) || spec.bump_width >= grid.length() / 4.0) {
            throw DomainError("bump width must lie in (0, L/4)");
        }
        const double amplitude = std::sqrt(spec.density);
        const double two_w_sq = 2.0 * spec.bump_width * spec.bump_width;
        for (std::size_t j = 0; j < n; ++j) {
            const double bump = spec.bump_fraction == 0.0
                                    ? 0.0
                                    : spec.bump_fraction * periodic_gaussian(grid, j, spec.center, two_w_sq);
            psi[j] = amplitude * (1.0 + bump);
        }
        break;
    }
    }
    return psi;
}

FieldState init_state(const Grid& grid, const ComponentInit& first, const ComponentInit& second) {
    return {init_component(grid, first), init_component(grid, second), 0.0};
}

std::string to_string(Stage stage) {
    switch (stage) {
    case Stage::inject: return "inject";
    case Stage::trap: return "trap";
    case Stage::ramp: return "ramp";
    case Stage::hold: return "hold";
    case Stage::release: return "release";
    }
    return "hold";
}

Stage stage_from_string(const std::string& name) {
    for (Stage s : {Stage::inject, Stage::trap, Stage::ramp, Stage::hold, Stage::release}) {
        if (to_string(s) == name) return s;
    }
    throw DomainError("unknown stage '" + name + "'");
}

RampSchedule::RampSchedule(Pair masses, Couplings initial, std::vector<StageSpec> stages,
                           double start_time)
    : masses_(masses), start_time_(start_time) {
    for (int i = 0; i < 2; ++i) {
        if (!(masses[i] > 0.0)) throw DomainError("masses must be positive");
    }
    knots_.push_back(initial);
    double t = start_time;
    for (const auto& spec : stages) {
        if (!(spec.duration >= 0.0) || !std::isfinite(spec.duration)) {
            throw DomainError("stage '" + to_string(spec.stage) + "' has a negative duration");
        }
        const Couplings& previous = knots_.back();
        Couplings next = previous;
        if (spec.stage == Stage::ramp) {
            if (spec.target) next = *spec.target;
            if (next.intra[0] < previous.intra[0] || next.intra[1] < previous.intra[1] ||
                next.inter < previous.inter) {
                throw DomainError("ramp stages may only increase the couplings");
            }
        } else if (spec.target && !(*spec.target == previous)) {
            throw DomainError("only ramp stages may change the couplings (stage '" +
                              to_string(spec.stage) + "')");
        }
        markers_.push_back({spec.stage, t, t + spec.duration});
        knots_.push_back(next);
        t += spec.duration;
    }
}

RampSchedule RampSchedule::constant(Pair masses, Couplings couplings) {
    return RampSchedule(masses, couplings);
}

double RampSchedule::end_time() const { return markers_.empty() ? start_time_ : markers_.back().end; }

Couplings RampSchedule::at(double t) const {
    for (std::size_t s = 0; s < markers_.size(); ++s) {
        const auto& m = markers_[s];
        if (t >= m.begin && t < m.end) {
            const double f = (t - m.begin) / (m.end - m.begin);
            const Couplings& a = knots_[s];
            const Couplings& b = knots_[s + 1];
            Couplings c;
            for (int i = 0; i < 2; ++i) c.intra[i] = a.intra[i] + f * (b.intra[i] - a.intra[i]);
            c.inter = a.inter + f * (b.inter - a.inter);
            return c;
        }
    }
    return t < start_time_ ? knots_.front() : knots_.back();
}

std::string RampSchedule::stage_at(double t) const {
    for (const auto& m : markers_) {
        if (t >= m.begin && t < m.end) return to_string(m.stage);
    }
    return "static";
}

double energy(const Grid& grid, const FieldState& state, const Pair& masses,
              const Couplings& couplings) {
    Fft fft(grid.points());
    return energy_with(fft, grid, state, masses, couplings);
}

SplitStepSolver::SplitStepSolver(Grid grid, RampSchedule schedule)
    : grid_(grid), schedule_(std::move(schedule)), fft_(grid.points()) {}

void SplitStepSolver::prepare(double dt) {
    if (dt == prepared_dt_) return;
    const std::size_t n = grid_.points();
    const double inv_n = 1.0 / static_cast<double>(n);
    half_kick1_.resize(n);
    half_kick2_.resize(n);
    full_kick1_.resize(n);
    full_kick2_.resize(n);
    const auto& m = schedule_.masses();
    for (std::size_t j = 0; j < n; ++j) {
        const double k = grid_.wavenumber(j);
        const double w1 = k * k / (2.0 * m[0]);
        const double w2 = k * k / (2.0 * m[1]);
        // The inverse FFT normalization is folded into the phase tables.
        half_kick1_[j] = std::polar(inv_n, -w1 * 0.5 * dt);
        half_kick2_[j] = std::polar(inv_n, -w2 * 0.5 * dt);
        full_kick1_[j] = std::polar(inv_n, -w1 * dt);
        full_kick2_[j] = std::polar(inv_n, -w2 * dt);
    }
    prepared_dt_ = dt;
}

void SplitStepSolver::kinetic(std::vector<Complex>& psi, const std::vector<Complex>& phase) {
    fft_.forward(psi);
    for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= phase[j];
    fft_.inverse(psi);
}

void SplitStepSolver::nonlinear(FieldState& state, double dt, std::size_t step_index) {
    const std::size_t n = grid_.points();
    const Couplings c = schedule_.at(state.time + 0.5 * dt);
    double max_phase = 0.0;
    bool finite = true;
    for (std::size_t j = 0; j < n; ++j) {
        const double n1 = std::norm(state.psi1[j]);
        const double n2 = std::norm(state.psi2[j]);
        const double phase1 = (c.intra[0] * n1 + c.inter * n2) * dt;
        const double phase2 = (c.intra[1] * n2 + c.inter * n1) * dt;
        finite = finite && std::isfinite(phase1) && std::isfinite(phase2);
        max_phase = std::max({max_phase, std::abs(phase1), std::abs(phase2)});
        state.psi1[j] *= std::polar(1.0, -phase1);
        state.psi2[j] *= std::polar(1.0, -phase2);
    }
    if (!finite) {
        std::ostringstream os;
        os << "non-finite field at step " << step_index << " (t = " << state.time << ", stage "
           << schedule_.stage_at(state.time) << ")";
        throw NumericalBlowup(os.str());
    }
    if (max_phase > max_phase_per_step) {
        std::ostringstream os;
        os << "nonlinear phase " << max_phase << " rad exceeds " << max_phase_per_step
           << " rad at step " << step_index << " (t = " << state.time << ", stage "
           << schedule_.stage_at(state.time) << "); reduce dt";
        throw NumericalBlowup(os.str());
    }
}

void SplitStepSolver::step(FieldState& state, double dt, std::size_t step_index) {
    advance(state, dt, 1, step_index);
}

void SplitStepSolver::advance(FieldState& state, double dt, std::size_t steps, std::size_t first_index) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("time step must be positive");
    const std::size_t n = grid_.points();
    if (state.psi1.size() != n || state.psi2.size() != n) {
        throw DomainError("field arrays do not match the grid");
    }
    if (steps == 0) return;
    prepare(dt);
    const double t0 = state.time;
    kinetic(state.psi1, half_kick1_);
    kinetic(state.psi2, half_kick2_);
    for (std::size_t k = 0; k < steps; ++k) {
        state.time = t0 + static_cast<double>(k) * dt;
        nonlinear(state, dt, first_index + k);
        const bool last = k + 1 == steps;
        kinetic(state.psi1, last ? half_kick1_ : full_kick1_);
        kinetic(state.psi2, last ? half_kick2_ : full_kick2_);
    }
    state.time = t0 + static_cast<double>(steps) * dt;
}

FieldState step(const Grid& grid, const FieldState& state, const RampSchedule& schedule, double dt) {
    SplitStepSolver solver(grid, schedule);
    FieldState next = state;
    solver.step(next, dt);
    return next;
}

Trajectory evolve(const Grid& grid, FieldState state, const RampSchedule& schedule, double t_final,
                  double dt, std::size_t sample_every) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    if (sample_every < 1) throw DomainError("sample_every must be at least 1");
    const double t0 = state.time;
    if (t_final < t0) throw DomainError("t_final precedes the initial time");
    const auto steps = static_cast<std::size_t>(std::llround((t_final - t0) / dt));

    SplitStepSolver solver(grid, schedule);
    Fft diag_fft(grid.points());

    Trajectory traj;
    traj.grid = grid;
    traj.masses = schedule.masses();
    traj.stages = schedule.markers();
    traj.dt = dt;
    traj.sample_every = sample_every;

    auto record = [&](const FieldState& s) {
        traj.times.push_back(s.time);
        traj.snapshots.push_back(s);
        traj.diagnostics.push_back(diagnose(diag_fft, grid, s, schedule));
    };

    // Ramp energy bookkeeping: energy at the first step boundary at or after
    // each ramp's start and end.
    struct RampProbe {
        double begin, end;
        std::optional<double> e_begin, e_end;
    };
    std::vector<RampProbe> probes;
    for (const auto& m : schedule.markers()) {
        if (m.stage == Stage::ramp && m.end > m.begin) probes.push_back({m.begin, m.end, {}, {}});
    }
    auto probe = [&](const FieldState& s) {
        for (auto& p : probes) {
            if (!p.e_begin && s.time >= p.begin - 0.5 * dt) {
                p.e_begin = energy_with(diag_fft, grid, s, schedule.masses(), schedule.at(s.time));
            }
            if (!p.e_end && s.time >= p.end - 0.5 * dt) {
                p.e_end = energy_with(diag_fft, grid, s, schedule.masses(), schedule.at(s.time));
            }
        }
    };

    // Chunk boundaries: sampling steps plus the first step at or after each
    // ramp edge, where the energy probe needs the state.
    std::vector<std::size_t> stops;
    for (std::size_t k = sample_every; k < steps; k += sample_every) stops.push_back(k);
    stops.push_back(steps);
    for (const auto& p : probes) {
        for (double edge : {p.begin, p.end}) {
            const double x = std::ceil((edge - t0) / dt - 0.5);
            const auto k = static_cast<std::size_t>(std::max(0.0, x));
            if (k > 0 && k < steps) stops.push_back(k);
        }
    }
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

    record(state);
    probe(state);
    std::size_t done = 0;
    for (std::size_t stop : stops) {
        if (stop == 0) continue;
        try {
            solver.advance(state, dt, stop - done, done);
        } catch (const NumericalBlowup& e) {
            throw NumericalBlowup(std::string("evolution aborted: ") + e.what());
        }
        done = stop;
        state.time = t0 + static_cast<double>(done) * dt;
        if (!probes.empty()) probe(state);
        if (done % sample_every == 0 || done == steps) record(state);
    }

    double injected = 0.0;
    bool any = false;
    for (const auto& p : probes) {
        if (p.e_begin && p.e_end) {
            injected += *p.e_end - *p.e_begin;
            any = true;
        }
    }
    if (any) traj.ramp_energy = injected;
    return traj;
}

FieldState release(const Trajectory& trajectory) {
    if (trajectory.snapshots.empty()) throw DomainError("cannot release an empty trajectory");
    return trajectory.snapshots.back();
}

} // namespace spincharge
