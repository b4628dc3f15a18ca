// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include "spincharge/analysis.hpp"
#include "spincharge/config.hpp"
#include "spincharge/dynamics.hpp"
#include "spincharge/effective_model.hpp"
#include "spincharge/errors.hpp"
#include "spincharge/io.hpp"
#include "spincharge/runner.hpp"
#include "spincharge/sweep.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace spincharge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

const fs::path source_dir = SPINCHARGE_SOURCE_DIR;
const fs::path scratch = fs::temp_directory_path() / "spincharge_acceptance";

int failures = 0;

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

void report(int id, const std::string& title, const std::function<bool(std::ostringstream&)>& check) {
    std::ostringstream detail;
    bool ok = false;
    try {
        ok = check(detail);
    } catch (const std::exception& e) {
        detail << "exception: " << e.what();
    }
    if (!ok) ++failures;
    std::printf("%s criterion %d: %s [%s]\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.str().c_str());
    std::fflush(stdout);
}

ComponentInit bump(double center, double eps, double width) {
    ComponentInit c;
    c.mode = InitMode::background_plus_bump;
    c.center = center;
    c.density = 1.0;
    c.bump_fraction = eps;
    c.bump_width = width;
    return c;
}

ComponentInit pulse(double center, double z0, double n) {
    ComponentInit c;
    c.mode = InitMode::pulse;
    c.center = center;
    c.width = z0;
    c.photon_number = n;
    return c;
}

double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double bisect_xexp(double c) {
    double lo = 0.0, hi = 50.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::exp(mid) < c ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

QuantumOpticsConfig symmetric_config() {
    QuantumOpticsConfig c;
    c.delta2 = {-6.0, -6.0};
    c.delta4 = {25.0, 25.0};
    c.rabi = {0.3, 0.3};
    c.coupling = {Pair{0.1, 0.1}, Pair{0.1, 0.1}};
    c.atom_density = {1000.0, 1000.0};
    c.gamma_1d = Pair{4 * pi * 0.01 / 0.6, 4 * pi * 0.01 / 0.6};
    c.bare_velocity = {1.0, 1.0};
    c.photon_number = {10.0, 10.0};
    c.pulse_width = {100.0, 100.0};
    return c;
}

json sweep_template(bool with_od) {
    json qo = {{"delta2", -3}, {"delta4", 25}, {"rabi", 0.1}, {"coupling", 0.1}, {"atom_density", 200},
               {"cooperativity", 0.2}, {"bare_velocity", 1}, {"photon_number", 10}, {"pulse_width", 100}};
    if (with_od) qo["optical_depth"] = 4000;
    return {{"quantum_optics", qo}};
}

ExperimentConfig small_dynamic(const fs::path& out) {
    auto c = load_config(std::string(R"({
        "model": {"intra": 1, "inter": 0.6, "density": 1},
        "grid": {"points": 512, "length": 140},
        "initial": [{"mode": "background_plus_bump", "bump_fraction": 0.01, "bump_width": 5},
                    {"mode": "background_plus_bump"}],
        "integration": {"dt": 0.01, "t_final": 40, "sample_every": 20},
        "analysis": {"z0": 10, "fronts": {"t_begin": 10, "t_end": 40},
                     "spectrum": {"export_q_max": 1.5}, "peaks": {}}
    })"));
    c.output.directory = out.string();
    return c;
}

} // namespace

int main() {
    fs::remove_all(scratch);

    ExperimentConfig reference = load_config_file((source_dir / "configs/reference_spin_charge.json").string());
    reference.output.directory = (scratch / "reference").string();
    std::optional<RunManifest> ref;
    double ref_seconds = 0.0;
    std::string ref_error;
    try {
        const auto t0 = std::chrono::steady_clock::now();
        ref = run_experiment(reference);
        ref_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } catch (const std::exception& e) {
        ref_error = e.what();
    }

    report(1, "front velocity ratio on the reference run", [&](std::ostringstream& d) {
        if (!ref) {
            d << ref_error;
            return false;
        }
        const auto& s = ref->scalars;
        if (!s.front_ratio) return false;
        d << "charge " << *s.front_charge << ", spin " << *s.front_spin << ", ratio " << *s.front_ratio
          << ", runtime " << ref_seconds << " s";
        return within(*s.front_ratio, 2.0, 0.10) && ref_seconds < 120.0;
    });

    report(2, "spin and charge velocities against direct evaluation", [&](std::ostringstream& d) {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            const double u = std::pow(10.0, 4 * unit(rng) - 2);
            const double K = std::pow(10.0, 4 * unit(rng) - 2);
            const double v12 = 0.999 * unit(rng) * pi * u / K;
            const auto s = spin_charge_velocities(u, K, v12);
            const double x = v12 * K / (pi * u);
            const double e1 = std::abs(s.charge - u * std::sqrt(1 + x)) / s.charge;
            const double e2 = std::abs(s.spin - u * std::sqrt(1 - x)) / s.spin;
            const double e3 = std::abs(s.charge * s.charge + s.spin * s.spin - 2 * u * u) / (2 * u * u);
            worst = std::max({worst, e1, e2, e3});
        }
        d << "10000 draws, worst relative deviation " << worst;
        return worst <= 1e-12;
    });

    report(3, "spectral peaks and low-q slopes on the reference run", [&](std::ostringstream& d) {
        if (!ref) {
            d << ref_error;
            return false;
        }
        const json peaks = json::parse(read_text(scratch / "reference" / "peaks.json"));
        const json& cut = peaks["cuts"][0];
        const auto& p = cut["peaks"];
        d << "q " << cut["q"].get<double>() << ", " << p.size() << " peaks";
        if (p.size() != 2) return false;
        const double w1 = p[0]["omega"], w2 = p[1]["omega"];
        const double ratio = w2 / w1;
        const double uc = std::sqrt(1.0 * (1.0 + 0.6) / 1.0), us = std::sqrt(1.0 * (1.0 - 0.6) / 1.0);
        const auto& s = ref->scalars;
        if (!s.spectral_charge || !s.spectral_spin) return false;
        d << " at " << w1 << ", " << w2 << ", ratio " << ratio << "; slopes " << *s.spectral_charge << " vs "
          << uc << ", " << *s.spectral_spin << " vs " << us;
        return w1 > 0 && within(ratio, 2.0, 0.10) && within(*s.spectral_charge, uc, 0.10) &&
               within(*s.spectral_spin, us, 0.10);
    });

    report(4, "norm, energy and splitting order", [&](std::ostringstream& d) {
        Grid g(256, 40.0);
        const Couplings weak{{0.1, 0.1}, 0.05};
        const Couplings strong{{1.0, 1.0}, 0.6};
        std::vector<RampSchedule> schedules{
            RampSchedule::constant({1.0, 1.0}, strong),
            RampSchedule({1.0, 1.0}, weak,
                         {{Stage::inject, 0.0, {}},
                          {Stage::trap, 0.5, {}},
                          {Stage::ramp, 5.0, strong},
                          {Stage::hold, 3.0, {}},
                          {Stage::release, 1.0, {}}}),
            RampSchedule({0.8, 1.3}, weak, {{Stage::ramp, 10.0, strong}}),
        };
        double norm_drift = 0.0;
        for (const auto& sched : schedules) {
            FieldState s = init_state(g, pulse(20.0, 2.0, 10.0), pulse(14.0, 3.0, 10.0));
            const double n1 = norm(g, s.psi1), n2 = norm(g, s.psi2);
            SplitStepSolver solver(g, sched);
            solver.advance(s, 1e-3, 10000);
            norm_drift = std::max({norm_drift, std::abs(norm(g, s.psi1) - n1) / n1,
                                   std::abs(norm(g, s.psi2) - n2) / n2});
        }

        const auto fixed = RampSchedule::constant({1.0, 1.0}, {{1.0, 0.8}, 0.6});
        const auto traj = evolve(g, init_state(g, bump(20.0, 0.05, 2.0), bump(16.0, 0.05, 3.0)), fixed, 10.0,
                                 1e-3, 500);
        const double e0 = traj.diagnostics.front().energy;
        double energy_drift = 0.0;
        for (const auto& x : traj.diagnostics) energy_drift = std::max(energy_drift, std::abs(x.energy - e0) / std::abs(e0));

        Grid h(128, 40.0);
        const FieldState s0 = init_state(h, bump(20.0, 0.05, 2.0), bump(15.0, 0.03, 3.0));
        auto run = [&](double dt) {
            FieldState s = s0;
            SplitStepSolver solver(h, fixed);
            solver.advance(s, dt, static_cast<std::size_t>(std::llround(2.0 / dt)));
            return s;
        };
        const FieldState best = run(0.02 / 64);
        const double e1 = max_abs_diff(run(0.02).psi1, best.psi1);
        const double e2 = max_abs_diff(run(0.01).psi1, best.psi1);
        const double order = e1 / e2;
        d << "norm drift " << norm_drift << ", energy drift " << energy_drift << ", error ratio " << order;
        return norm_drift < 1e-10 && energy_drift < 1e-6 && order >= 3.0 && order <= 5.0;
    });

    report(5, "free gaussian width law", [&](std::ostringstream& d) {
        Grid g(2048, 200.0);
        const double s0 = 1.0, m = 1.0, dt = 0.01;
        FieldState s = init_state(g, pulse(100.0, s0, 1.0), ComponentInit{});
        SplitStepSolver solver(g, RampSchedule::constant({m, m}, {{0.0, 0.0}, 0.0}));
        double worst = 0.0;
        for (int block = 1; block <= 10; ++block) {
            solver.advance(s, dt, 100, static_cast<std::size_t>(block - 1) * 100);
            const double t = block * 1.0;
            double n = 0.0, s2 = 0.0;
            for (std::size_t j = 0; j < g.points(); ++j) {
                const double w = std::norm(s.psi1[j]);
                const double x = g.wrap(g.position(j) - 100.0);
                n += w;
                s2 += w * x * x;
            }
            const double expected = s0 * std::sqrt(1.0 + std::pow(t / (2 * m * s0 * s0), 2));
            worst = std::max(worst, std::abs(std::sqrt(s2 / n) / expected - 1.0));
        }
        d << "t up to 10 m s0^2, worst relative width error " << worst;
        return worst < 1e-3;
    });

    report(6, "delta2 optimum and gamma_max sweeps", [&](std::ostringstream& d) {
        const double oracle = bisect_xexp(80.0);
        const auto opt = optimize_delta2(1.0, 1.0, 1.0, 0.2, 4000.0, 10.0, 0.1, 20.0);
        const double residual = std::abs(std::exp(opt.delta2_abs) - 0.2 * 400.0 / opt.delta2_abs) / opt.gamma;
        d << "optimum " << opt.delta2_abs << " vs root " << oracle << ", residual " << residual;
        bool ok = std::abs(opt.delta2_abs - oracle) / oracle < 0.01 && residual < 1e-6;

        SweepOptions o;
        o.out_dir = scratch / "sweep_delta2";
        o.run.map_only = true;
        o.workers = 4;
        const auto t = sweep(load_config(sweep_template(true)),
                             {parse_axis("quantum_optics.delta2=-1,-2,-3,-4,-5,-6,-7,-8")}, o);
        std::vector<double> g;
        for (const auto& r : t.rows) g.push_back(r.scalars.gamma_max ? (*r.scalars.gamma_max)[0] : -1.0);
        const auto peak = static_cast<std::size_t>(std::max_element(g.begin(), g.end()) - g.begin());
        bool unimodal = g.size() == 8;
        for (std::size_t i = 0; i < peak; ++i) unimodal = unimodal && g[i] < g[i + 1];
        for (std::size_t i = peak; i + 1 < g.size(); ++i) unimodal = unimodal && g[i] > g[i + 1];
        d << "; |delta2| sweep peaks at " << peak + 1 << (unimodal ? " (unimodal)" : " (not unimodal)");
        ok = ok && unimodal && std::abs(static_cast<double>(peak + 1) - oracle) < 1.0;

        SweepOptions od = o;
        od.out_dir = scratch / "sweep_od";
        const auto u = sweep(load_config(sweep_template(false)),
                             {parse_axis("quantum_optics.atom_density=50,100,200")}, od);
        bool monotone = u.rows.size() == 3;
        for (std::size_t i = 0; monotone && i + 1 < u.rows.size(); ++i) {
            monotone = (*u.rows[i].scalars.gamma_max)[0] <= (*u.rows[i + 1].scalars.gamma_max)[0];
        }
        d << "; OD sweep " << (monotone ? "non-decreasing" : "not monotone");
        return ok && monotone;
    });

    report(7, "validity examples and the dilute case", [&](std::ostringstream& d) {
        QuantumOpticsConfig c = symmetric_config();
        c.atom_density = {1.0, 1.0};
        c.pulse_width = {1.0, 1.0};
        const auto small = validity_check({1e-4, 1e-4}, c);
        const auto* a = small.find("stark_window_a");
        bool ok = a && within(a->rhs, 2.076, 5e-4) && within(a->ratio, 4.817e-5, 5e-4) &&
                  a->status == ValidityStatus::pass;
        c.delta2 = {-1.0, -1.0};
        c.delta4 = {1.0, 1.0};
        const auto big = validity_check({0.5, 0.5}, c);
        const auto* f = big.find("stark_window_a");
        ok = ok && f && within(f->rhs, 0.4472, 5e-4) && within(f->ratio, 1.118, 5e-4) &&
             f->status == ValidityStatus::fail;
        if (a && f) d << "rhs " << a->rhs << " ratio " << a->ratio << "; rhs " << f->rhs << " ratio " << f->ratio;

        const auto dilute = build_effective_model(symmetric_config());
        const double density_ratio = 1000.0 / dilute.model.density[0];
        bool dilute_pass = true;
        for (const auto& e : dilute.validity.entries) {
            if (e.name.rfind("slow_light", 0) == 0) continue;
            dilute_pass = dilute_pass && e.status == ValidityStatus::pass;
        }
        d << "; n_z/rho0 " << density_ratio << (dilute_pass ? " passes" : " fails");
        return ok && dilute_pass && within(density_ratio, 1e4, 1e-9);
    });

    report(8, "reproducibility and round trips", [&](std::ostringstream& d) {
        const auto a = run_experiment(small_dynamic(scratch / "repeat_a"));
        const auto b = run_experiment(small_dynamic(scratch / "repeat_b"));
        bool same = a.document["files"].size() == b.document["files"].size() && !a.document["files"].empty();
        for (std::size_t i = 0; same && i < a.document["files"].size(); ++i) {
            same = a.document["files"][i]["sha256"] == b.document["files"][i]["sha256"];
        }
        d << a.document["files"].size() << " artifacts " << (same ? "identical" : "differ");

        bool round_trip = true;
        for (const auto& e : fs::directory_iterator(source_dir / "configs")) {
            const auto c = load_config_file(e.path().string());
            round_trip = round_trip && load_config(to_json(c)) == c;
        }
        d << "; configs " << (round_trip ? "round-trip" : "do not round-trip");

        Grid g(64, 20.0);
        const auto traj = evolve(g, init_state(g, bump(10.0, 0.05, 2.0), pulse(7.0, 1.5, 3.0)),
                                 RampSchedule::constant({1.0, 1.0}, {{1.0, 0.8}, 0.6}), 2.0, 0.01, 1);
        write_trajectory_csv(scratch / "trajectory.csv", traj);
        const auto back = read_trajectory_csv(scratch / "trajectory.csv", g.length());
        double worst = back.snapshots.size() == traj.snapshots.size() ? 0.0 : 1.0;
        for (std::size_t k = 0; worst < 1.0 && k < traj.snapshots.size(); ++k) {
            worst = std::max({worst, std::abs(back.times[k] - traj.times[k]),
                              max_abs_diff(back.snapshots[k].psi1, traj.snapshots[k].psi1),
                              max_abs_diff(back.snapshots[k].psi2, traj.snapshots[k].psi2)});
        }
        const auto map = spectral_function(traj, SpectralSource::psi1, Window::hann);
        write_spectrum_csv(scratch / "spectrum.csv", map);
        const auto map_back = read_spectrum_csv(scratch / "spectrum.csv");
        if (map_back.intensity.size() != map.intensity.size()) worst = 1.0;
        for (std::size_t i = 0; worst < 1.0 && i < map.intensity.size(); ++i) {
            worst = std::max(worst, std::abs(map_back.intensity[i] - map.intensity[i]) /
                                        std::max(1.0, std::abs(map.intensity[i])));
        }
        d << "; CSV re-parse deviation " << worst;
        return same && round_trip && worst <= 1e-12;
    });

    return failures == 0 ? 0 : 1;
}
