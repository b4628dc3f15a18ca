#include "spincharge/analysis.hpp"

#include "spincharge/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace spincharge {

namespace {

constexpr double pi = std::numbers::pi;

double median(std::vector<double> values) {
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    double m = *mid;
    if (values.size() % 2 == 0) {
        m = 0.5 * (m + *std::max_element(values.begin(), mid));
    }
    return m;
}

// Vertex offset in (-0.5, 0.5) bins of the parabola through three samples.
double parabolic_offset(double left, double centre, double right) {
    const double denom = left - 2.0 * centre + right;
    if (denom == 0.0) return 0.0;
    const double offset = 0.5 * (left - right) / denom;
    return std::clamp(offset, -0.5, 0.5);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss += r * r;
    }
    fit.rms = std::sqrt(ss / n);
    return fit;
}

double uniform_step(const std::vector<double>& times) {
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * std::abs(dt)) {
            std::ostringstream os;
            os << "spectral analysis needs uniform sampling; interval " << i << " is "
               << times[i] - times[i - 1] << " instead of " << dt;
            throw DomainError(os.str());
        }
    }
    return dt;
}

} // namespace

std::string to_string(Branch branch) { return branch == Branch::charge ? "charge" : "spin"; }

std::string to_string(FitMethod method) {
    return method == FitMethod::front_tracking ? "front_tracking" : "spectral_slope";
}

std::string to_string(SpectralSource source) {
    switch (source) {
    case SpectralSource::psi1: return "psi1";
    case SpectralSource::psi2: return "psi2";
    case SpectralSource::charge: return "charge";
    case SpectralSource::spin: return "spin";
    }
    return "psi1";
}

std::string to_string(Window window) { return window == Window::hann ? "hann" : "none"; }

SpectralSource spectral_source_from_string(const std::string& name) {
    for (auto s : {SpectralSource::psi1, SpectralSource::psi2, SpectralSource::charge, SpectralSource::spin}) {
        if (to_string(s) == name) return s;
    }
    throw DomainError("unknown spectral source '" + name + "'");
}

Window window_from_string(const std::string& name) {
    if (name == "hann") return Window::hann;
    if (name == "none") return Window::none;
    throw DomainError("unknown window '" + name + "'");
}

DensityWaves density_waves(const Trajectory& trajectory) {
    if (trajectory.snapshots.empty()) throw DomainError("density_waves needs a non-empty trajectory");
    DensityWaves waves;
    waves.grid = trajectory.grid;
    waves.times = trajectory.times;
    const std::size_t n = trajectory.grid.points();
    for (const auto& s : trajectory.snapshots) {
        std::vector<double> a(n), b(n), c(n), d(n);
        for (std::size_t j = 0; j < n; ++j) {
            a[j] = std::norm(s.psi1[j]);
            b[j] = std::norm(s.psi2[j]);
            c[j] = a[j] + b[j];
            d[j] = a[j] - b[j];
        }
        waves.n1.push_back(std::move(a));
        waves.n2.push_back(std::move(b));
        waves.charge.push_back(std::move(c));
        waves.spin.push_back(std::move(d));
    }
    return waves;
}

VelocityFit track_fronts(const DensityWaves& waves, Branch branch, const TrackWindow& window) {
    if (waves.times.empty()) throw DomainError("track_fronts needs a non-empty trajectory");
    const auto& signal = branch == Branch::charge ? waves.charge : waves.spin;
    const Grid& grid = waves.grid;
    const std::size_t n = grid.points();
    const double dz = grid.spacing();

    auto deviation = [&](std::size_t s) {
        std::vector<double> dev = signal[s];
        const double bg = median(dev);
        for (auto& v : dev) v -= bg;
        return dev;
    };
    auto argmax_abs = [](const std::vector<double>& v, auto&& admissible) {
        std::size_t best = v.size();
        double best_value = -1.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (admissible(j) && std::abs(v[j]) > best_value) {
                best_value = std::abs(v[j]);
                best = j;
            }
        }
        return best;
    };

    double origin = 0.0;
    if (window.origin) {
        origin = *window.origin;
    } else {
        const auto dev0 = deviation(0);
        origin = grid.position(argmax_abs(dev0, [](std::size_t) { return true; }));
    }

    VelocityFit fit;
    fit.branch = branch;
    fit.method = FitMethod::front_tracking;
    fit.t_begin = window.t_begin;
    fit.t_end = window.t_end;

    for (std::size_t s = 0; s < waves.times.size(); ++s) {
        const double t = waves.times[s];
        if (t < window.t_begin || t > window.t_end) continue;
        const auto dev = deviation(s);

        // Noise floor relative to the total background density.
        const double reference = std::abs(median(waves.charge[s]));
        const std::size_t j = argmax_abs(dev, [&](std::size_t k) {
            const double d = grid.wrap(grid.position(k) - origin);
            return d >= -0.5 * dz;
        });
        if (j == n || std::abs(dev[j]) < 1e-6 * reference || dev[j] == 0.0) {
            std::ostringstream os;
            os << to_string(branch) << " branch has no detectable extremum at t = " << t;
            throw NoSignal(os.str());
        }
        const double left = dev[(j + n - 1) % n];
        const double right = dev[(j + 1) % n];
        const double sgn = dev[j] > 0.0 ? 1.0 : -1.0;
        const double offset = parabolic_offset(sgn * left, sgn * dev[j], sgn * right);
        const double displacement = grid.wrap(grid.position(j) - origin) + offset * dz;
        fit.times.push_back(t);
        fit.positions.push_back(origin + displacement);
    }
    if (fit.times.size() < 2) {
        throw InsufficientData("track_fronts needs at least two samples inside the window");
    }
    const LineFit line = fit_line(fit.times, fit.positions);
    fit.velocity = line.slope;
    const auto [lo, hi] = std::minmax_element(fit.positions.begin(), fit.positions.end());
    fit.residual = line.rms / std::max(*hi - *lo, dz);
    return fit;
}

std::size_t SpectralMap::nearest_q(double value) const {
    if (q.empty()) throw NoSignal("spectral map has no q bins");
    std::size_t best = 0;
    for (std::size_t i = 1; i < q.size(); ++i) {
        if (std::abs(q[i] - value) < std::abs(q[best] - value)) best = i;
    }
    return best;
}

SpectralMap spectral_function(const Trajectory& trajectory, SpectralSource source, Window window,
                              double reference_frequency) {
    const std::size_t nt = trajectory.snapshots.size();
    if (nt < 64) {
        std::ostringstream os;
        os << "spectral analysis needs at least 64 samples, got " << nt;
        throw InsufficientData(os.str());
    }
    const double dt = uniform_step(trajectory.times);
    const Grid& grid = trajectory.grid;
    const std::size_t nz = grid.points();

    std::vector<Complex> field(nt * nz);
    for (std::size_t s = 0; s < nt; ++s) {
        const auto& snap = trajectory.snapshots[s];
        const Complex demod = std::polar(1.0, reference_frequency * trajectory.times[s]);
        for (std::size_t j = 0; j < nz; ++j) {
            Complex v;
            switch (source) {
            case SpectralSource::psi1: v = snap.psi1[j] * demod; break;
            case SpectralSource::psi2: v = snap.psi2[j] * demod; break;
            case SpectralSource::charge: v = std::norm(snap.psi1[j]) + std::norm(snap.psi2[j]); break;
            case SpectralSource::spin: v = std::norm(snap.psi1[j]) - std::norm(snap.psi2[j]); break;
            }
            field[s * nz + j] = v;
        }
    }
    Complex mean{0.0, 0.0};
    for (const auto& v : field) mean += v;
    mean /= static_cast<double>(field.size());
    for (std::size_t s = 0; s < nt; ++s) {
        double w = 1.0;
        if (window == Window::hann) {
            w = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(s) / static_cast<double>(nt - 1)));
        }
        for (std::size_t j = 0; j < nz; ++j) field[s * nz + j] = w * (field[s * nz + j] - mean);
    }

    Fft fft(nt, nz);
    fft.forward(field);

    SpectralMap map;
    map.source = source;
    map.window = window;
    map.reference_frequency = reference_frequency;
    const auto half_z = static_cast<std::ptrdiff_t>(nz / 2);
    const auto half_t = static_cast<std::ptrdiff_t>(nt / 2);
    const auto inz = static_cast<std::ptrdiff_t>(nz);
    const auto int_ = static_cast<std::ptrdiff_t>(nt);
    for (std::ptrdiff_t j = -half_z; j < inz - half_z; ++j) {
        map.q.push_back(2.0 * pi * static_cast<double>(j) / grid.length());
    }
    const double period = static_cast<double>(nt) * dt;
    for (std::ptrdiff_t m = -half_t; m < int_ - half_t; ++m) {
        map.omega.push_back(2.0 * pi * static_cast<double>(m) / period);
    }
    map.intensity.resize(nz * nt);
    const double norm = 1.0 / static_cast<double>(nz * nt);
    for (std::ptrdiff_t j = -half_z; j < inz - half_z; ++j) {
        const auto col = static_cast<std::size_t>((j + inz) % inz);
        const auto iq = static_cast<std::size_t>(j + half_z);
        for (std::ptrdiff_t m = -half_t; m < int_ - half_t; ++m) {
            // The forward transform uses e^{-iωt}; +ω lives at DFT index -m.
            const auto row = static_cast<std::size_t>(((-m) % int_ + int_) % int_);
            const auto iw = static_cast<std::size_t>(m + half_t);
            map.intensity[iq * nt + iw] = std::norm(field[row * nz + col]) * norm;
        }
    }
    return map;
}

double condensate_frequency(const Trajectory& trajectory, int component) {
    if (component != 1 && component != 2) throw DomainError("component must be 1 or 2");
    if (trajectory.snapshots.size() < 2) throw InsufficientData("need at least two samples");
    std::vector<double> phase;
    for (const auto& s : trajectory.snapshots) {
        const auto& psi = component == 1 ? s.psi1 : s.psi2;
        Complex mean{0.0, 0.0};
        for (const auto& v : psi) mean += v;
        if (std::abs(mean) == 0.0) throw NoSignal("component has no condensate");
        double p = std::arg(mean);
        if (!phase.empty()) {
            while (p - phase.back() > pi) p -= 2.0 * pi;
            while (p - phase.back() < -pi) p += 2.0 * pi;
        }
        phase.push_back(p);
    }
    return -fit_line(trajectory.times, phase).slope;
}

PeakCut peak_positions(const SpectralMap& map, double q, const PeakOptions& options) {
    if (map.q.empty() || map.omega.empty()) throw NoSignal("empty spectral map");
    PeakCut cut;
    cut.q_requested = q;
    const std::size_t iq = map.nearest_q(q);
    cut.q = map.q[iq];
    cut.q_offset = cut.q - q;

    const std::size_t nw = map.omega.size();
    std::vector<double> s(nw);
    for (std::size_t i = 0; i < nw; ++i) s[i] = map.at(iq, i);

    auto in_range = [&](std::size_t i) {
        return map.omega[i] >= options.omega_min && map.omega[i] <= options.omega_max;
    };
    double top = 0.0;
    for (std::size_t i = 0; i < nw; ++i) {
        if (in_range(i)) top = std::max(top, s[i]);
    }
    if (!(top > 0.0)) {
        std::ostringstream os;
        os << "spectral cut at q = " << cut.q << " is empty";
        throw NoSignal(os.str());
    }
    const double d_omega = nw > 1 ? map.omega[1] - map.omega[0] : 0.0;

    for (std::size_t i = 1; i + 1 < nw; ++i) {
        if (!in_range(i) || !(s[i] > s[i - 1] && s[i] >= s[i + 1])) continue;
        // Topographic prominence: drop to the higher of the two bases.
        double left_base = s[i];
        for (std::size_t k = i; k-- > 0;) {
            if (s[k] > s[i]) break;
            left_base = std::min(left_base, s[k]);
        }
        double right_base = s[i];
        for (std::size_t k = i + 1; k < nw; ++k) {
            if (s[k] > s[i]) break;
            right_base = std::min(right_base, s[k]);
        }
        const double prominence = s[i] - std::max(left_base, right_base);
        if (prominence < options.prominence_fraction * top) continue;
        Peak p;
        p.bin = i;
        p.intensity = s[i];
        p.prominence = prominence;
        p.omega = map.omega[i] + parabolic_offset(s[i - 1], s[i], s[i + 1]) * d_omega;
        cut.peaks.push_back(p);
    }
    return cut;
}

SpectralVelocities velocities_from_spectrum(const SpectralMap& map, const SlopeOptions& options) {
    if (map.omega.size() < 2) throw InsufficientData("spectral map has too few ω bins");
    const double d_omega = map.omega[1] - map.omega[0];
    PeakOptions peak_options;
    peak_options.prominence_fraction = options.prominence_fraction;
    peak_options.omega_min = 0.0;

    SpectralVelocities out;
    std::size_t merged = 0;
    for (std::size_t iq = 0; iq < map.q.size(); ++iq) {
        const double q = map.q[iq];
        if (!(q > 0.0) || q < options.q_min || q > options.q_max) continue;
        const PeakCut cut = peak_positions(map, q, peak_options);
        std::vector<Peak> peaks = cut.peaks;
        std::sort(peaks.begin(), peaks.end(),
                  [](const Peak& a, const Peak& b) { return a.intensity > b.intensity; });
        if (peaks.size() < 2) {
            if (peaks.size() == 1) ++merged;
            continue;
        }
        double lo = std::min(peaks[0].omega, peaks[1].omega);
        double hi = std::max(peaks[0].omega, peaks[1].omega);
        if (hi - lo < options.min_bin_separation * d_omega || lo < options.min_bin_separation * d_omega) {
            ++merged;
            continue;
        }
        out.q_used.push_back(q);
        out.charge_omega.push_back(hi);
        out.spin_omega.push_back(lo);
    }
    if (out.q_used.size() < 3) {
        std::ostringstream os;
        os << "only " << out.q_used.size() << " q bins show two resolved branches";
        if (merged >= 3) {
            os << "; branches merge in " << merged << " bins";
            throw AmbiguityError(os.str());
        }
        throw InsufficientData(os.str());
    }

    auto through_origin = [&](const std::vector<double>& omega, Branch branch) {
        double sqq = 0.0, sqw = 0.0, sww = 0.0;
        for (std::size_t i = 0; i < omega.size(); ++i) {
            sqq += out.q_used[i] * out.q_used[i];
            sqw += out.q_used[i] * omega[i];
            sww += omega[i] * omega[i];
        }
        VelocityFit fit;
        fit.branch = branch;
        fit.method = FitMethod::spectral_slope;
        fit.velocity = sqw / sqq;
        double ss = 0.0;
        for (std::size_t i = 0; i < omega.size(); ++i) {
            const double r = omega[i] - fit.velocity * out.q_used[i];
            ss += r * r;
        }
        fit.residual = std::sqrt(ss / sww);
        fit.t_begin = 0.0;
        fit.t_end = 0.0;
        return fit;
    };
    out.charge = through_origin(out.charge_omega, Branch::charge);
    out.spin = through_origin(out.spin_omega, Branch::spin);
    return out;
}

} // namespace spincharge
