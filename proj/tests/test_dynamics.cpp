#include <doctest.h>

#include "spincharge/dynamics.hpp"
#include "spincharge/errors.hpp"

#include <cmath>
#include <numbers>

using namespace spincharge;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double rms_width(const Grid& g, const std::vector<Complex>& psi, double center) {
    double n = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < g.points(); ++j) {
        const double w = std::norm(psi[j]);
        const double d = g.wrap(g.position(j) - center);
        n += w;
        s2 += w * d * d;
    }
    return std::sqrt(s2 / n);
}

ComponentInit bump(double center, double eps, double width, double rho = 1.0) {
    ComponentInit c;
    c.mode = InitMode::background_plus_bump;
    c.center = center;
    c.density = rho;
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

} // namespace

TEST_CASE("grid") {
    Grid g(16, 8.0);
    CHECK(g.spacing() == 0.5);
    CHECK(g.wavenumber(1) == Approx(2 * pi / 8.0));
    CHECK(g.wavenumber(8) == Approx(-8 * 2 * pi / 8.0));
    CHECK(g.wavenumber(15) == Approx(-2 * pi / 8.0));
    CHECK(g.wrap(5.0) == Approx(-3.0));
    CHECK_THROWS_AS(Grid(24, 1.0), DomainError);
    CHECK_THROWS_AS(Grid(8, 1.0), DomainError);
    CHECK_THROWS_AS(Grid(16, 0.0), DomainError);
}

TEST_CASE("pulse normalization") {
    Grid g(1024, 64.0);
    const auto psi = init_component(g, pulse(32.0, 1.0, 10.0));
    CHECK(norm(g, psi) == Approx(10.0).epsilon(1e-9));
    CHECK(std::abs(norm(g, psi) - 10.0) < 1e-8);
    // Continuous oracle: A² √(2π) z0 = N.
    const double amplitude = std::sqrt(10.0 / (std::sqrt(2 * pi) * 1.0));
    CHECK(std::abs(psi[512]) == Approx(amplitude).epsilon(1e-8));
    CHECK_THROWS_AS(init_component(g, pulse(32.0, 17.0, 10.0)), DomainError);
    CHECK_THROWS_AS(init_component(g, pulse(32.0, 1.0, -1.0)), DomainError);
}

TEST_CASE("identical specs give identical fields") {
    Grid g(256, 40.0);
    const auto s = init_state(g, pulse(12.0, 2.0, 5.0), pulse(12.0, 2.0, 5.0));
    CHECK(s.psi1 == s.psi2);
}

TEST_CASE("zero bump is a uniform background with a global phase") {
    Grid g(128, 20.0);
    FieldState s = init_state(g, bump(10.0, 0.0, 2.0, 0.7), ComponentInit{});
    for (const auto& v : s.psi1) CHECK(v == Complex(std::sqrt(0.7), 0.0));
    const auto sched = RampSchedule::constant({1.0, 1.0}, {{1.0, 1.0}, 0.0});
    const auto traj = evolve(g, s, sched, 2.0, 0.01, 200);
    const auto& end = traj.snapshots.back().psi1;
    for (const auto& v : end) CHECK(std::abs(v - end[0]) < 1e-12);
}

TEST_CASE("plane wave phase rotation") {
    Grid g(128, 20.0);
    const double rho = 0.8, U = 1.3, T = 5.0;
    FieldState s = init_state(g, bump(10.0, 0.0, 1.0, rho), ComponentInit{});
    SplitStepSolver solver(g, RampSchedule::constant({1.0, 1.0}, {{U, 1.0}, 0.4}));
    solver.advance(s, 0.005, 1000);
    const Complex expected = std::sqrt(rho) * std::exp(Complex(0.0, -U * rho * T));
    for (const auto& v : s.psi1) REQUIRE(std::abs(v - expected) < 1e-10);

    // Moving plane wave: ω = k²/2m + Uρ.
    FieldState w;
    const double k = 2 * pi * 3 / g.length(), m = 0.7;
    for (std::size_t j = 0; j < g.points(); ++j) {
        w.psi1.push_back(std::sqrt(rho) * std::exp(Complex(0.0, k * g.position(j))));
        w.psi2.push_back(0.0);
    }
    SplitStepSolver moving(g, RampSchedule::constant({m, 1.0}, {{U, 1.0}, 0.4}));
    moving.advance(w, 0.005, 1000);
    const double omega = k * k / (2 * m) + U * rho;
    for (std::size_t j = 0; j < g.points(); ++j) {
        const Complex e = std::sqrt(rho) * std::exp(Complex(0.0, k * g.position(j) - omega * T));
        REQUIRE(std::abs(w.psi1[j] - e) < 1e-10);
    }
}

TEST_CASE("free gaussian spreading") {
    Grid g(2048, 200.0);
    const double s0 = 1.0, m = 1.0;
    FieldState s = init_state(g, pulse(100.0, s0, 1.0), ComponentInit{});
    CHECK(rms_width(g, s.psi1, 100.0) == Approx(s0).epsilon(1e-9));
    SplitStepSolver solver(g, RampSchedule::constant({m, m}, {{0.0, 0.0}, 0.0}));
    const double dt = 0.01;
    for (int block = 1; block <= 10; ++block) {
        solver.advance(s, dt, 100, static_cast<std::size_t>(block - 1) * 100);
        const double t = block * 1.0;
        const double expected = s0 * std::sqrt(1.0 + std::pow(t / (2 * m * s0 * s0), 2));
        REQUIRE(std::abs(rms_width(g, s.psi1, 100.0) / expected - 1.0) < 1e-3);
    }
}

TEST_CASE("Strang splitting is second order") {
    Grid g(128, 40.0);
    const auto sched = RampSchedule::constant({1.0, 1.0}, {{1.0, 0.8}, 0.6});
    const FieldState s0 = init_state(g, bump(20.0, 0.05, 2.0), bump(15.0, 0.03, 3.0));
    auto run = [&](double dt) {
        FieldState s = s0;
        SplitStepSolver solver(g, sched);
        solver.advance(s, dt, static_cast<std::size_t>(std::llround(2.0 / dt)));
        return s;
    };
    const FieldState ref = run(0.02 / 64);
    const double e1 = max_abs_diff(run(0.02).psi1, ref.psi1);
    const double e2 = max_abs_diff(run(0.01).psi1, ref.psi1);
    const double e3 = max_abs_diff(run(0.005).psi1, ref.psi1);
    MESSAGE("errors " << e1 << " " << e2 << " " << e3);
    CHECK(e1 / e2 >= 3.0);
    CHECK(e1 / e2 <= 5.0);
    CHECK(e2 / e3 >= 3.0);
    CHECK(e2 / e3 <= 5.0);
}

TEST_CASE("fused advance agrees with single steps") {
    Grid g(64, 20.0);
    const auto sched = RampSchedule::constant({1.0, 1.2}, {{1.0, 0.8}, 0.6});
    FieldState a = init_state(g, bump(10.0, 0.05, 2.0), bump(7.0, 0.03, 2.0));
    FieldState b = a;
    SplitStepSolver solver(g, sched);
    for (std::size_t k = 0; k < 50; ++k) solver.step(a, 0.01, k);
    solver.advance(b, 0.01, 50);
    CHECK(max_abs_diff(a.psi1, b.psi1) < 1e-12);
    CHECK(max_abs_diff(a.psi2, b.psi2) < 1e-12);
    CHECK(a.time == Approx(b.time));
}

TEST_CASE("norm conservation for static and ramped schedules") {
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
    for (const auto& sched : schedules) {
        FieldState s = init_state(g, pulse(20.0, 2.0, 10.0), pulse(14.0, 3.0, 10.0));
        const double n1 = norm(g, s.psi1), n2 = norm(g, s.psi2);
        SplitStepSolver solver(g, sched);
        solver.advance(s, 1e-3, 10000);
        CHECK(std::abs(norm(g, s.psi1) - n1) / n1 < 1e-10);
        CHECK(std::abs(norm(g, s.psi2) - n2) / n2 < 1e-10);
    }
}

TEST_CASE("energy conservation for static couplings") {
    Grid g(256, 40.0);
    const Couplings c{{1.0, 0.8}, 0.6};
    const auto sched = RampSchedule::constant({1.0, 1.0}, c);
    const FieldState s = init_state(g, bump(20.0, 0.05, 2.0), bump(16.0, 0.05, 3.0));
    const auto traj = evolve(g, s, sched, 10.0, 1e-3, 500);
    const double e0 = traj.diagnostics.front().energy;
    double worst = 0.0;
    for (const auto& d : traj.diagnostics) worst = std::max(worst, std::abs(d.energy - e0) / std::abs(e0));
    MESSAGE("worst relative energy drift " << worst);
    CHECK(worst < 1e-6);
    CHECK(traj.times.back() == Approx(10.0));
}

TEST_CASE("energy examples") {
    Grid g(64, 12.0);
    const double rho = 0.9;
    const Couplings c{{1.5, 0.7}, 0.4};
    FieldState one = init_state(g, bump(6.0, 0.0, 1.0, rho), ComponentInit{});
    CHECK(energy(g, one, {1.0, 1.0}, c) == Approx(0.5 * 1.5 * rho * rho * 12.0).epsilon(1e-13));
    FieldState two = init_state(g, bump(6.0, 0.0, 1.0, rho), bump(6.0, 0.0, 1.0, rho));
    CHECK(energy(g, two, {1.0, 1.0}, c) == Approx((0.75 + 0.35 + 0.4) * rho * rho * 12.0).epsilon(1e-13));

    FieldState wave;
    const double k = 2 * pi * 2 / g.length(), m = 1.7;
    for (std::size_t j = 0; j < g.points(); ++j) {
        wave.psi1.push_back(std::sqrt(rho) * std::exp(Complex(0.0, k * g.position(j))));
        wave.psi2.push_back(0.0);
    }
    const double e = energy(g, wave, {m, 1.0}, {{0.0, 0.0}, 0.0});
    const double expected = k * k / (2 * m) * rho * 12.0;
    CHECK(std::abs(e - expected) / expected < 1e-10);
}

TEST_CASE("mirror symmetry") {
    Grid g(256, 40.0);
    const auto sched = RampSchedule({1.0, 1.0}, {{0.5, 0.5}, 0.2}, {{Stage::ramp, 2.0, Couplings{{1.0, 0.9}, 0.6}}});
    FieldState s = init_state(g, pulse(20.0, 2.0, 8.0), bump(20.0, 0.04, 3.0));
    SplitStepSolver solver(g, sched);
    solver.advance(s, 1e-3, 3000);
    const std::size_t n = g.points();
    for (std::size_t j = 0; j < n; ++j) {
        REQUIRE(std::abs(s.psi1[j] - s.psi1[(n - j) % n]) < 1e-12);
        REQUIRE(std::abs(s.psi2[j] - s.psi2[(n - j) % n]) < 1e-12);
    }
}

TEST_CASE("component exchange symmetry") {
    Grid g(128, 30.0);
    const FieldState a = init_state(g, pulse(12.0, 2.0, 6.0), bump(18.0, 0.03, 2.5));
    FieldState b;
    b.psi1 = a.psi2;
    b.psi2 = a.psi1;
    FieldState x = a, y = b;
    SplitStepSolver sa(g, RampSchedule::constant({0.9, 1.4}, {{1.1, 0.7}, 0.5}));
    SplitStepSolver sb(g, RampSchedule::constant({1.4, 0.9}, {{0.7, 1.1}, 0.5}));
    sa.advance(x, 2e-3, 500);
    sb.advance(y, 2e-3, 500);
    CHECK(x.psi1 == y.psi2);
    CHECK(x.psi2 == y.psi1);
}

TEST_CASE("decoupled components evolve independently") {
    Grid g(128, 30.0);
    const FieldState pair = init_state(g, pulse(12.0, 2.0, 6.0), bump(18.0, 0.03, 2.5));
    const auto sched = RampSchedule::constant({1.0, 0.8}, {{1.1, 0.7}, 0.0});
    FieldState both = pair;
    FieldState only1{pair.psi1, std::vector<Complex>(g.points()), 0.0};
    FieldState only2{std::vector<Complex>(g.points()), pair.psi2, 0.0};
    SplitStepSolver s(g, sched);
    s.advance(both, 2e-3, 500);
    s.advance(only1, 2e-3, 500);
    s.advance(only2, 2e-3, 500);
    CHECK(max_abs_diff(both.psi1, only1.psi1) < 1e-12);
    CHECK(max_abs_diff(both.psi2, only2.psi2) < 1e-12);
}

TEST_CASE("ramp schedule rules") {
    const Couplings lo{{0.1, 0.1}, 0.05}, hi{{1.0, 1.0}, 0.6};
    RampSchedule r({1.0, 1.0}, lo, {{Stage::hold, 1.0, {}}, {Stage::ramp, 2.0, hi}, {Stage::hold, 1.0, {}}});
    CHECK(r.end_time() == Approx(4.0));
    CHECK(r.at(0.5) == lo);
    CHECK(r.at(2.0).intra[0] == Approx(0.55));
    CHECK(r.at(2.0).inter == Approx(0.325));
    CHECK(r.at(10.0) == hi);
    CHECK(r.stage_at(2.0) == "ramp");
    CHECK_THROWS_AS(RampSchedule({1.0, 1.0}, hi, {{Stage::ramp, 1.0, lo}}), DomainError);
    CHECK_THROWS_AS(RampSchedule({1.0, 1.0}, lo, {{Stage::hold, 1.0, hi}}), DomainError);
    CHECK_THROWS_AS(RampSchedule({1.0, 1.0}, lo, {{Stage::hold, -1.0, {}}}), DomainError);
    CHECK_THROWS_AS(RampSchedule({0.0, 1.0}, lo), DomainError);
}

TEST_CASE("evolve sampling, release and ramp energy") {
    Grid g(64, 20.0);
    const Couplings lo{{0.1, 0.1}, 0.05}, hi{{1.0, 1.0}, 0.6};
    const RampSchedule sched({1.0, 1.0}, lo, {{Stage::hold, 0.5, {}}, {Stage::ramp, 1.0, hi}, {Stage::hold, 0.5, {}}});
    const FieldState s = init_state(g, pulse(10.0, 2.0, 4.0), pulse(8.0, 2.0, 4.0));

    const auto empty = evolve(g, s, sched, 0.0, 0.01, 10);
    CHECK(empty.snapshots.size() == 1);
    CHECK(release(empty).psi1 == s.psi1);

    const auto traj = evolve(g, s, sched, 2.0, 0.01, 10);
    CHECK(traj.times.size() == 21);
    for (std::size_t i = 1; i < traj.times.size(); ++i) CHECK(traj.times[i] > traj.times[i - 1]);
    CHECK(traj.times.back() == Approx(2.0));
    REQUIRE(traj.ramp_energy);
    CHECK(*traj.ramp_energy > 0.0);
    const auto out = release(traj);
    CHECK(norm(g, out.psi1) == norm(g, traj.snapshots.back().psi1));

    const auto odd = evolve(g, s, sched, 0.25, 0.01, 10);
    CHECK(odd.times.back() == Approx(0.25));
    CHECK(odd.times.size() == 4);
}

TEST_CASE("symmetric evolution of identical components") {
    Grid g(64, 20.0);
    const FieldState s = init_state(g, pulse(10.0, 2.0, 4.0), pulse(10.0, 2.0, 4.0));
    const auto traj = evolve(g, s, RampSchedule::constant({1.0, 1.0}, {{1.0, 1.0}, 0.5}), 1.0, 0.01, 50);
    const auto out = release(traj);
    for (std::size_t j = 0; j < g.points(); ++j) CHECK(std::norm(out.psi1[j]) == std::norm(out.psi2[j]));
}

TEST_CASE("blowup guard") {
    Grid g(64, 20.0);
    FieldState s = init_state(g, bump(10.0, 0.0, 1.0, 100.0), ComponentInit{});
    SplitStepSolver solver(g, RampSchedule::constant({1.0, 1.0}, {{1.0, 1.0}, 0.0}));
    CHECK_THROWS_AS(solver.advance(s, 0.01, 10), NumericalBlowup);
    FieldState nan = init_state(g, bump(10.0, 0.0, 1.0, 1.0), ComponentInit{});
    nan.psi1[3] = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(solver.advance(nan, 0.01, 10), NumericalBlowup);
}
