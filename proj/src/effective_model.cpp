#include "spincharge/effective_model.hpp"

#include "spincharge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace spincharge {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double identity_tolerance = 1e-12;
constexpr double matched_tolerance = 1e-9;

const char* species_name(int x) { return x == 0 ? "a" : "b"; }

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream os;
        os << what << " must be positive and finite, got " << value;
        throw DomainError(os.str());
    }
}

void require_positive(const Pair& values, const char* what) {
    for (int i = 0; i < 2; ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
            std::ostringstream os;
            os << what << "[" << i << "] must be positive and finite, got " << values[i];
            throw DomainError(os.str());
        }
    }
}

bool close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

double sign(double v) { return (v > 0.0) - (v < 0.0); }

// Rethrows err with a context prefix, preserving its dynamic type.
template <class Fn>
auto with_context(const std::string& context, Fn&& fn) {
    try {
        return fn();
    } catch (const SignViolation& e) {
        throw SignViolation(context + ": " + e.what());
    } catch (const SingularityError& e) {
        throw SingularityError(context + ": " + e.what());
    } catch (const DemixingInstability& e) {
        throw DemixingInstability(context + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError(context + ": " + e.what());
    }
}

ValidityStatus worst(ValidityStatus a, ValidityStatus b) {
    return static_cast<int>(a) >= static_cast<int>(b) ? a : b;
}

} // namespace

std::string to_string(ValidityStatus status) {
    switch (status) {
    case ValidityStatus::pass: return "pass";
    case ValidityStatus::warn: return "warn";
    case ValidityStatus::fail: return "fail";
    }
    return "fail";
}

QuantumOpticsConfig resolve(const QuantumOpticsConfig& config) {
    QuantumOpticsConfig out = config;

    require_positive(out.gamma_total, "gamma_total");
    require_positive(out.rabi, "rabi");
    for (int i = 0; i < 2; ++i) {
        for (int x = 0; x < 2; ++x) {
            if (!(out.coupling[i][x] > 0.0)) {
                std::ostringstream os;
                os << "coupling[" << i << "][" << x << "] must be positive, got " << out.coupling[i][x];
                throw DomainError(os.str());
            }
        }
    }
    require_positive(out.atom_density, "atom_density");
    require_positive(out.bare_velocity, "bare_velocity");
    require_positive(out.photon_number, "photon_number");
    require_positive(out.pulse_width, "pulse_width");
    require_positive(out.gamma0, "gamma0");
    require_positive(out.beta, "beta");

    if (!out.gamma_1d && !out.cooperativity) {
        throw DomainError("one of gamma_1d or cooperativity must be supplied");
    }
    if (out.gamma_1d) require_positive(*out.gamma_1d, "gamma_1d");
    if (out.cooperativity) require_positive(*out.cooperativity, "cooperativity");

    Pair gamma_1d{};
    Pair eta{};
    for (int x = 0; x < 2; ++x) {
        if (out.gamma_1d && out.cooperativity) {
            const double derived = (*out.gamma_1d)[x] / out.gamma_total;
            if (!close(derived, (*out.cooperativity)[x], identity_tolerance)) {
                std::ostringstream os;
                os << "cooperativity[" << species_name(x) << "] = " << (*out.cooperativity)[x]
                   << " disagrees with gamma_1d/gamma_total = " << derived;
                throw DomainError(os.str());
            }
            gamma_1d[x] = (*out.gamma_1d)[x];
            eta[x] = (*out.cooperativity)[x];
        } else if (out.gamma_1d) {
            gamma_1d[x] = (*out.gamma_1d)[x];
            eta[x] = gamma_1d[x] / out.gamma_total;
        } else {
            eta[x] = (*out.cooperativity)[x];
            gamma_1d[x] = eta[x] * out.gamma_total;
        }
    }
    out.gamma_1d = gamma_1d;
    out.cooperativity = eta;

    // Species x stores field x, so its pulse length is pulse_width[x].
    Pair od{};
    for (int x = 0; x < 2; ++x) {
        od[x] = eta[x] * out.atom_density[x] * out.pulse_width[x];
    }
    if (out.optical_depth) {
        require_positive(*out.optical_depth, "optical_depth");
        for (int x = 0; x < 2; ++x) {
            if (!close(od[x], (*out.optical_depth)[x], identity_tolerance)) {
                std::ostringstream os;
                os << "optical_depth[" << species_name(x) << "] = " << (*out.optical_depth)[x]
                   << " disagrees with cooperativity*atom_density*pulse_width = " << od[x];
                throw DomainError(os.str());
            }
        }
    }
    out.optical_depth = od;

    for (int x = 0; x < 2; ++x) {
        if (out.delta2[x] == 0.0) {
            throw SingularityError(std::string("delta2[") + species_name(x) + "] is zero");
        }
        if (out.delta4[x] == 0.0) {
            throw SingularityError(std::string("delta4[") + species_name(x) + "] is zero");
        }
    }
    const double s = sign(out.delta2[0]);
    if (sign(out.delta2[1]) != s || sign(out.delta4[0]) != -s || sign(out.delta4[1]) != -s) {
        throw SignViolation("detuning signs must satisfy sign(delta2[a]) = sign(delta2[b]) = "
                            "-sign(delta4[a]) = -sign(delta4[b]) to keep interactions positive");
    }
    return out;
}

EffectiveModel direct_model(Pair mass, Pair intra, double v1, double v2, Pair density) {
    require_positive(mass, "mass");
    require_positive(density, "density");
    EffectiveModel model;
    model.mass = mass;
    model.intra = intra;
    model.v1 = v1;
    model.v2 = v2;
    model.v12 = v1 + v2;
    model.density = density;
    model.group_velocity = {0.0, 0.0};
    model.mixing_angle = {pi / 2, pi / 2};
    return model;
}

const ValidityEntry* ValidityReport::find(const std::string& name) const {
    auto it = std::find_if(entries.begin(), entries.end(),
                           [&](const ValidityEntry& e) { return e.name == name; });
    return it == entries.end() ? nullptr : &*it;
}

double ValidityReport::worst_normalized_ratio() const {
    double worst_ratio = 0.0;
    for (const auto& e : entries) {
        worst_ratio = std::max(worst_ratio, e.ratio / e.pass_threshold);
    }
    return worst_ratio;
}

ValidityEntry grade(std::string name, double lhs, double rhs, double pass_threshold,
                    double warn_threshold) {
    ValidityEntry entry;
    entry.name = std::move(name);
    entry.lhs = lhs;
    entry.rhs = rhs;
    entry.pass_threshold = pass_threshold;
    entry.warn_threshold = warn_threshold;
    if (lhs == 0.0) {
        entry.ratio = 0.0;
    } else if (rhs > 0.0) {
        entry.ratio = lhs / rhs;
    } else {
        entry.ratio = std::numeric_limits<double>::infinity();
    }
    if (entry.ratio <= pass_threshold) {
        entry.status = ValidityStatus::pass;
    } else if (entry.ratio <= warn_threshold) {
        entry.status = ValidityStatus::warn;
    } else {
        entry.status = ValidityStatus::fail;
    }
    return entry;
}

double mixing_angle(double coupling, double atom_density, double rabi) {
    require_positive(coupling, "coupling");
    require_positive(atom_density, "atom_density");
    require_positive(rabi, "rabi");
    return std::atan(coupling * std::sqrt(2.0 * pi * atom_density) / rabi);
}

double group_velocity(double bare_velocity, double rabi, double coupling, double atom_density) {
    require_positive(bare_velocity, "bare_velocity");
    require_positive(coupling, "coupling");
    require_positive(atom_density, "atom_density");
    if (!(rabi >= 0.0) || !std::isfinite(rabi)) {
        throw DomainError("rabi must be non-negative and finite");
    }
    return bare_velocity * rabi * rabi / (pi * coupling * coupling * atom_density);
}

double effective_mass(double delta2, double group_velocity, double gamma_1d, double atom_density,
                      SignPolicy policy) {
    if (delta2 == 0.0) {
        throw SingularityError("delta2 = 0 gives an infinite effective mass");
    }
    require_positive(group_velocity, "group_velocity");
    require_positive(gamma_1d, "gamma_1d");
    require_positive(atom_density, "atom_density");
    const double mass = -gamma_1d * atom_density / (4.0 * delta2 * group_velocity);
    if (policy == SignPolicy::repulsive_only && !(mass > 0.0)) {
        std::ostringstream os;
        os << "delta2 = " << delta2
           << " > 0 gives a negative effective mass; delta2 must be negative while delta4 "
              "is positive to keep interaction terms positive";
        throw SignViolation(os.str());
    }
    return mass;
}

double intra_repulsion(double gamma_1d, double group_velocity, double delta4, SignPolicy policy) {
    if (delta4 == 0.0) {
        throw SingularityError("delta4 = 0 gives a divergent intra-species repulsion");
    }
    require_positive(gamma_1d, "gamma_1d");
    require_positive(group_velocity, "group_velocity");
    const double intra = gamma_1d * group_velocity / (2.0 * delta4);
    if (policy == SignPolicy::repulsive_only && !(intra > 0.0)) {
        std::ostringstream os;
        os << "delta4 = " << delta4
           << " < 0 gives an attractive intra-species coupling; delta4 must be positive "
              "while delta2 is negative to keep interaction terms positive";
        throw SignViolation(os.str());
    }
    return intra;
}

InterSpecies inter_repulsion(const QuantumOpticsConfig& config) {
    const auto& g = config.coupling;
    for (int x = 0; x < 2; ++x) {
        if (config.delta4[x] == 0.0) {
            throw SingularityError(std::string("delta4[") + species_name(x) +
                                   "] = 0 gives a divergent inter-species repulsion");
        }
    }
    for (int i = 0; i < 2; ++i) {
        for (int x = 0; x < 2; ++x) require_positive(g[i][x], "coupling");
    }
    const double nu_g1 =
        group_velocity(config.bare_velocity[0], config.rabi[0], g[0][0], config.atom_density[0]);
    const double nu_g2 =
        group_velocity(config.bare_velocity[1], config.rabi[1], g[1][1], config.atom_density[1]);

    // g[field][species]: g1a = g[0][0], g2a = g[1][0], g1b = g[0][1], g2b = g[1][1].
    const double g1a2 = g[0][0] * g[0][0];
    const double g2a2 = g[1][0] * g[1][0];
    const double g1b2 = g[0][1] * g[0][1];
    const double g2b2 = g[1][1] * g[1][1];

    InterSpecies out;
    out.v1 = pi * g1a2 * g2a2 * nu_g1 / (g2b2 * config.delta4[0] * config.bare_velocity[0]);
    out.v2 = pi * g2b2 * g1b2 * nu_g2 / (g1a2 * config.delta4[1] * config.bare_velocity[1]);
    out.v12 = out.v1 + out.v2;
    return out;
}

ComponentLuttinger luttinger_params(double density, double intra, double mass) {
    require_positive(density, "density");
    require_positive(intra, "intra-species coupling");
    require_positive(mass, "mass");
    ComponentLuttinger out;
    out.u = std::sqrt(density * intra / mass);
    out.K = std::sqrt(pi * pi * density / (mass * intra));
    out.gamma = mass * intra / density;
    return out;
}

SpinChargeVelocities spin_charge_velocities(double u, double K, double v12) {
    require_positive(u, "u");
    require_positive(K, "K");
    if (!(v12 >= 0.0) || !std::isfinite(v12)) {
        throw DomainError("v12 must be non-negative and finite");
    }
    const double x = v12 * K / (pi * u);
    if (x >= 1.0) {
        std::ostringstream os;
        os << "v12*K/(pi*u) = " << x << " >= 1: spin velocity is not real (demixing)";
        throw DemixingInstability(os.str());
    }
    return {u * std::sqrt(1.0 + x), u * std::sqrt(1.0 - x)};
}

double gamma_max(double gamma0, double beta, double delta2_abs, double gamma_total, double eta,
                 double optical_depth, double photon_number) {
    require_positive(gamma0, "gamma0");
    require_positive(beta, "beta");
    require_positive(delta2_abs, "|delta2|");
    require_positive(gamma_total, "gamma_total");
    require_positive(eta, "eta");
    require_positive(optical_depth, "optical_depth");
    require_positive(photon_number, "photon_number");
    const double x = delta2_abs / gamma_total;
    const double loss_branch = gamma0 * std::exp(beta * x);
    const double depth_branch = eta * beta / x * optical_depth / photon_number;
    return std::min(loss_branch, depth_branch);
}

Delta2Optimum optimize_delta2(double gamma0, double beta, double gamma_total, double eta,
                              double optical_depth, double photon_number, double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo > 0.0) || hi < lo) {
        std::ostringstream os;
        os << "search interval [" << lo << ", " << hi << "] must be positive, finite and ordered";
        throw DomainError(os.str());
    }
    auto value = [&](double d) {
        return gamma_max(gamma0, beta, d, gamma_total, eta, optical_depth, photon_number);
    };
    // log(loss branch) - log(depth branch); strictly increasing in |Δ2|.
    const double log_depth_scale = std::log(eta * beta * optical_depth / photon_number);
    auto gap = [&](double d) {
        const double x = d / gamma_total;
        return std::log(gamma0) + beta * x - log_depth_scale + std::log(x);
    };
    auto gap_slope = [&](double d) { return beta / gamma_total + 1.0 / d; };

    if (lo == hi) return {lo, value(lo), false};
    if (gap(lo) >= 0.0) return {lo, value(lo), false};
    if (gap(hi) <= 0.0) return {hi, value(hi), false};

    // Safeguarded Newton on the bracketed crossing.
    double a = lo;
    double b = hi;
    double d = 0.5 * (a + b);
    for (int iter = 0; iter < 200; ++iter) {
        const double h = gap(d);
        if (h == 0.0) break;
        (h < 0.0 ? a : b) = d;
        double next = d - h / gap_slope(d);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - d) <= 1e-15 * d) {
            d = next;
            break;
        }
        d = next;
    }
    return {d, value(d), true};
}

ValidityReport validity_check(Pair n, const QuantumOpticsConfig& config) {
    for (int i = 0; i < 2; ++i) {
        if (!(n[i] >= 0.0)) throw DomainError("photon densities must be non-negative");
    }
    const QuantumOpticsConfig c = resolve(config);
    const double gamma = c.gamma_total;
    const Pair& gamma_1d = *c.gamma_1d;
    auto modulus = [&](double delta2) { return std::sqrt(gamma * gamma + 4.0 * delta2 * delta2); };

    const double fill_a = n[0] / c.atom_density[0];
    const double fill_b = n[1] / c.atom_density[1];

    ValidityReport report;
    report.entries.push_back(
        grade("stark_window_a", fill_a, std::abs(c.delta4[0]) / modulus(c.delta2[0])));
    report.entries.push_back(
        grade("stark_window_b", fill_b, std::abs(c.delta4[1]) / modulus(c.delta2[1])));
    report.entries.push_back(grade("spin_wavevector_a", fill_a, gamma_1d[0] / modulus(c.delta2[0])));
    // The species-b bound is printed with Γ and Δ2 of species a; the symmetric
    // counterpart uses Γ_1D and Δ2 of species b. Both are graded.
    report.entries.push_back(grade("spin_wavevector_b_printed", fill_b, gamma / modulus(c.delta2[0])));
    report.entries.push_back(
        grade("spin_wavevector_b_symmetric", fill_b, gamma_1d[1] / modulus(c.delta2[1])));

    for (int x = 0; x < 2; ++x) {
        const double theta = mixing_angle(c.coupling[x][x], c.atom_density[x], c.rabi[x]);
        report.entries.push_back(grade(std::string("slow_light_") + species_name(x),
                                       1.0 - std::sin(theta), 1.0, 1e-3, 1e-2));
    }
    for (const auto& e : report.entries) report.overall = worst(report.overall, e.status);
    return report;
}

LuttingerParams derive_luttinger(const EffectiveModel& model) {
    LuttingerParams out;
    for (int i = 0; i < 2; ++i) {
        const auto lp = with_context("component " + std::to_string(i + 1), [&] {
            return luttinger_params(model.density[i], model.intra[i], model.mass[i]);
        });
        out.u[i] = lp.u;
        out.K[i] = lp.K;
        out.gamma[i] = lp.gamma;
    }
    if (close(out.u[0], out.u[1], matched_tolerance) && close(out.K[0], out.K[1], matched_tolerance)) {
        out.velocities = spin_charge_velocities(out.u[0], out.K[0], model.v12);
        out.status = SeparationStatus::separated;
    }
    return out;
}

ModelBundle build_effective_model(const QuantumOpticsConfig& config) {
    ModelBundle bundle;
    bundle.config = resolve(config);
    const auto& c = bundle.config;
    const Pair& gamma_1d = *c.gamma_1d;

    EffectiveModel& m = bundle.model;
    for (int i = 0; i < 2; ++i) {
        const std::string label = "polariton " + std::to_string(i + 1) + " (species " + species_name(i) + ")";
        const double g = c.coupling[i][i];
        m.mixing_angle[i] = mixing_angle(g, c.atom_density[i], c.rabi[i]);
        m.group_velocity[i] = group_velocity(c.bare_velocity[i], c.rabi[i], g, c.atom_density[i]);
        m.mass[i] = with_context(label + ", delta2", [&] {
            return effective_mass(c.delta2[i], m.group_velocity[i], gamma_1d[i], c.atom_density[i],
                                  c.sign_policy);
        });
        m.intra[i] = with_context(label + ", delta4", [&] {
            return intra_repulsion(gamma_1d[i], m.group_velocity[i], c.delta4[i], c.sign_policy);
        });
        m.density[i] = c.photon_number[i] / c.pulse_width[i];
    }
    const InterSpecies inter = inter_repulsion(c);
    m.v1 = inter.v1;
    m.v2 = inter.v2;
    m.v12 = inter.v12;

    if (c.sign_policy == SignPolicy::repulsive_only) {
        bundle.luttinger = derive_luttinger(m);
    } else {
        // Luttinger quantities need positive m, U; skip them when signs are unchecked.
        bool positive = true;
        for (int i = 0; i < 2; ++i) positive = positive && m.mass[i] > 0 && m.intra[i] > 0;
        if (positive) bundle.luttinger = derive_luttinger(m);
    }
    bundle.validity = validity_check(m.density, c);
    for (int x = 0; x < 2; ++x) {
        bundle.gamma_max[x] = gamma_max(c.gamma0, c.beta, std::abs(c.delta2[x]), c.gamma_total,
                                        (*c.cooperativity)[x], (*c.optical_depth)[x],
                                        c.photon_number[x]);
    }
    return bundle;
}

} // namespace spincharge
