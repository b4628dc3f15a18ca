#include "spincharge/runner.hpp"

#include "spincharge/errors.hpp"
#include "spincharge/io.hpp"
#include "spincharge/version.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

namespace spincharge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

[[noreturn]] void rethrow_with_prefix(const std::string& prefix) {
    try {
        throw;
    } catch (const NumericalBlowup& e) {
        throw NumericalBlowup(prefix + e.what());
    } catch (const NoSignal& e) {
        throw NoSignal(prefix + e.what());
    } catch (const InsufficientData& e) {
        throw InsufficientData(prefix + e.what());
    } catch (const AmbiguityError& e) {
        throw AmbiguityError(prefix + e.what());
    } catch (const SignViolation& e) {
        throw SignViolation(prefix + e.what());
    } catch (const SingularityError& e) {
        throw SingularityError(prefix + e.what());
    } catch (const DemixingInstability& e) {
        throw DemixingInstability(prefix + e.what());
    } catch (const DomainError& e) {
        throw DomainError(prefix + e.what());
    } catch (const NotFound& e) {
        throw NotFound(prefix + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const Error& e) {
        throw Error(prefix + e.what());
    }
}

std::string error_type(const std::exception& e) {
    if (dynamic_cast<const NumericalBlowup*>(&e)) return "numerical_blowup";
    if (dynamic_cast<const NoSignal*>(&e)) return "no_signal";
    if (dynamic_cast<const InsufficientData*>(&e)) return "insufficient_data";
    if (dynamic_cast<const AmbiguityError*>(&e)) return "ambiguity";
    if (dynamic_cast<const SignViolation*>(&e)) return "sign_violation";
    if (dynamic_cast<const SingularityError*>(&e)) return "singularity";
    if (dynamic_cast<const DemixingInstability*>(&e)) return "demixing_instability";
    if (dynamic_cast<const DomainError*>(&e)) return "domain_error";
    if (dynamic_cast<const NotFound*>(&e)) return "not_found";
    if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
    return "error";
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json scalars_json(const RunScalars& s) {
    json j = json::object();
    j["gamma_max_1"] = s.gamma_max ? json((*s.gamma_max)[0]) : json(nullptr);
    j["gamma_max_2"] = s.gamma_max ? json((*s.gamma_max)[1]) : json(nullptr);
    j["u_charge_analytic"] = optional_json(s.u_charge);
    j["u_spin_analytic"] = optional_json(s.u_spin);
    j["u_charge_over_u_spin_analytic"] = optional_json(s.analytic_ratio);
    j["front_velocity_charge"] = optional_json(s.front_charge);
    j["front_velocity_spin"] = optional_json(s.front_spin);
    j["front_velocity_ratio"] = optional_json(s.front_ratio);
    j["cut_peak_ratio"] = optional_json(s.peak_ratio);
    j["spectral_velocity_charge"] = optional_json(s.spectral_charge);
    j["spectral_velocity_spin"] = optional_json(s.spectral_spin);
    j["spectral_velocity_ratio"] = optional_json(s.spectral_ratio);
    j["worst_validity_ratio"] = s.worst_validity_ratio;
    j["validity_status"] = s.validity_status;
    j["ramp_energy"] = optional_json(s.ramp_energy);
    return j;
}

double healing_length(double mass, double density, double coupling) {
    return 1.0 / std::sqrt(2.0 * mass * density * coupling);
}

ComponentInit resolve_init(const InitSpec& spec, int i, const Grid& grid, const EffectiveModel& model,
                           const std::optional<QuantumOpticsConfig>& qo) {
    ComponentInit c;
    c.mode = spec.mode;
    c.center = spec.center.value_or(0.5 * grid.length());
    const std::string who = "initial[" + std::to_string(i) + "]";
    if (spec.mode == InitMode::pulse) {
        if (spec.width) {
            c.width = *spec.width;
        } else if (qo) {
            c.width = qo->pulse_width[i];
        } else {
            throw ConfigError(who + ": pulse width required without a quantum_optics block");
        }
        if (spec.photon_number) {
            c.photon_number = *spec.photon_number;
        } else if (qo) {
            c.photon_number = qo->photon_number[i];
        } else {
            throw ConfigError(who + ": photon_number required without a quantum_optics block");
        }
    }
    c.density = spec.density.value_or(model.density[i]);
    c.bump_fraction = spec.bump_fraction;
    // Default bump: ten healing lengths, wide enough to stay in the linear-phonon regime.
    c.bump_width = spec.bump_width.value_or(10.0 * healing_length(model.mass[i], c.density, model.intra[i]));
    return c;
}

class Clock {
public:
    explicit Clock(json& timings) : timings_(timings) {}
    void start(const std::string& stage) {
        stage_ = stage;
        begin_ = std::chrono::steady_clock::now();
    }
    void stop() {
        const auto end = std::chrono::steady_clock::now();
        timings_[stage_] = std::chrono::duration<double>(end - begin_).count();
    }
    const std::string& stage() const { return stage_; }

private:
    json& timings_;
    std::string stage_ = "setup";
    std::chrono::steady_clock::time_point begin_ = std::chrono::steady_clock::now();
};

} // namespace

int exit_code_for(const std::exception& error) {
    if (dynamic_cast<const NumericalBlowup*>(&error) || dynamic_cast<const NoSignal*>(&error) ||
        dynamic_cast<const InsufficientData*>(&error) || dynamic_cast<const AmbiguityError*>(&error)) {
        return 3;
    }
    return 1;
}

RunManifest run_experiment(const ExperimentConfig& input, const RunOptions& options) {
    ExperimentConfig config = input;
    if (options.dt) config.integration.dt = *options.dt;
    if (options.format) config.output.format = *options.format;
    if (options.allow_invalid) config.allow_invalid = true;
    if (options.out_dir) config.output.directory = options.out_dir->string();
    if (!(config.integration.dt > 0.0)) throw ConfigError("dt must be positive");

    const fs::path dir = config.output.directory;
    try {
        fs::create_directories(dir);
    } catch (const fs::filesystem_error& e) {
        throw ConfigError("output directory " + dir.string() + " is not writable: " + e.what());
    }
    {
        // Probe writability before any work is done.
        const fs::path probe = dir / ".write_probe";
        try {
            write_text(probe, "");
        } catch (const Error&) {
            throw ConfigError("output directory " + dir.string() + " is not writable");
        }
        fs::remove(probe);
    }

    RunManifest result;
    result.path = dir / "manifest.json";
    json timings = json::object();
    json warnings = json::array();
    json model_doc = json::object();
    json analyses = json::object();
    std::vector<std::string> files;
    Clock clock(timings);
    RunScalars& sc = result.scalars;

    auto finish = [&](const std::string& status, int code, const json& failure) {
        result.status = status;
        result.exit_code = code;
        json inventory = json::array();
        for (const auto& f : files) {
            const fs::path p = dir / f;
            if (!fs::exists(p)) continue;
            inventory.push_back({{"path", f}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
        }
        json doc = {
            {"version", version_string()},
            {"status", status},
            {"exit_code", code},
            {"config", to_json(config)},
            {"model", model_doc},
            {"analyses", analyses},
            {"files", inventory},
            {"timings_seconds", timings},
            {"scalars", scalars_json(sc)},
            {"warnings", warnings},
            {"ramp_energy", optional_json(sc.ramp_energy)},
        };
        doc["failure"] = failure;
        result.document = doc;
        write_text(result.path, doc.dump(2) + "\n");
    };

    try {
        clock.start("effective_model");
        EffectiveModel model;
        LuttingerParams lutt;
        ValidityReport validity;
        if (config.quantum_optics) {
            const ModelBundle bundle = build_effective_model(*config.quantum_optics);
            model = bundle.model;
            lutt = bundle.luttinger;
            validity = bundle.validity;
            sc.gamma_max = bundle.gamma_max;
            model_doc = effective_model_document(model, lutt, &validity, &bundle.gamma_max);
        } else {
            const auto& m = *config.model;
            model = direct_model(m.mass, m.intra, m.v1, m.v2, m.density);
            lutt = derive_luttinger(model);
            model_doc = effective_model_document(model, lutt);
        }
        if (lutt.velocities) {
            sc.u_charge = lutt.velocities->charge;
            sc.u_spin = lutt.velocities->spin;
            sc.analytic_ratio = lutt.velocities->charge / lutt.velocities->spin;
        }
        sc.worst_validity_ratio = validity.worst_normalized_ratio();
        sc.validity_status = to_string(validity.overall);
        write_text(dir / "effective_model.json", model_doc.dump(2) + "\n");
        files.push_back("effective_model.json");
        clock.stop();

        if (validity.overall == ValidityStatus::fail) {
            if (!config.allow_invalid) {
                finish("invalid", 2, json(nullptr));
                return result;
            }
            warnings.push_back("validity check failed; continuing because invalid runs are allowed");
        } else if (validity.overall == ValidityStatus::warn) {
            warnings.push_back("validity check reports marginal conditions");
        }

        if (options.map_only || !config.grid) {
            finish("ok", 0, json(nullptr));
            return result;
        }

        clock.start("prepare");
        const Grid grid(config.grid->points, config.grid->length);
        const Couplings model_couplings{model.intra, model.v12};
        Couplings initial = model_couplings;
        std::vector<StageSpec> stages;
        if (config.schedule) {
            if (config.schedule->initial) initial = *config.schedule->initial;
            stages = config.schedule->stages;
            for (auto& s : stages) {
                if (s.stage == Stage::ramp && !s.target) s.target = model_couplings;
            }
        }
        const RampSchedule schedule(model.mass, initial, stages);
        const double dt = config.integration.dt;
        const double t_final = config.integration.t_final.value_or(schedule.end_time());
        const auto steps = static_cast<long long>(std::llround(t_final / dt));
        const std::size_t every = config.integration.sample_every;
        if (config.analysis.spectrum && steps % static_cast<long long>(every) != 0) {
            throw ConfigError("t_final/dt = " + std::to_string(steps) +
                              " steps is not a multiple of sample_every; the spectrum needs uniform sampling");
        }
        const double k_max = pi * static_cast<double>(grid.points()) / grid.length();
        const double m_min = std::min(model.mass[0], model.mass[1]);
        if (k_max * k_max * dt / (2.0 * m_min) > pi) {
            warnings.push_back("dt exceeds the split-step resonance bound 2*pi*m/k_max^2 = " +
                               format_double(2.0 * pi * m_min / (k_max * k_max)) +
                               "; background modes may grow");
        }
        FieldState state = init_state(grid, resolve_init(config.initial[0], 0, grid, model, config.quantum_optics),
                                      resolve_init(config.initial[1], 1, grid, model, config.quantum_optics));
        clock.stop();

        clock.start("evolve");
        const Trajectory traj = evolve(grid, std::move(state), schedule, t_final, dt, every);
        sc.ramp_energy = traj.ramp_energy;
        clock.stop();

        clock.start("release");
        const FieldState final_state = release(traj);
        analyses["release"] = {{"time", final_state.time},
                               {"norm1", norm(grid, final_state.psi1)},
                               {"norm2", norm(grid, final_state.psi2)}};
        if (config.output.trajectory && !options.reduced) {
            if (config.output.format == OutputFormat::csv) {
                write_trajectory_csv(dir / "trajectory.csv", traj);
                files.push_back("trajectory.csv");
            } else {
                write_trajectory_binary(dir / "trajectory.bin", traj);
                files.push_back("trajectory.bin");
            }
            write_text(dir / "trajectory.meta.json", trajectory_metadata(traj, schedule).dump(2) + "\n");
            files.push_back("trajectory.meta.json");
        }
        clock.stop();

        const AnalysisSpec& an = config.analysis;
        std::optional<double> z0 = an.z0;
        if (!z0 && config.quantum_optics) z0 = config.quantum_optics->pulse_width[0];

        if (an.fronts || (config.output.densities && !options.reduced && steps > 0)) {
            clock.start("fronts");
            const DensityWaves waves = density_waves(traj);
            if (config.output.densities && !options.reduced && steps > 0) {
                write_density_csv(dir / "densities.csv", waves);
                files.push_back("densities.csv");
            }
            if (an.fronts) {
                TrackWindow window;
                window.t_begin = an.fronts->t_begin;
                if (an.fronts->t_end) window.t_end = *an.fronts->t_end;
                window.origin = an.fronts->origin;
                const VelocityFit c = track_fronts(waves, Branch::charge, window);
                const VelocityFit s = track_fronts(waves, Branch::spin, window);
                sc.front_charge = c.velocity;
                sc.front_spin = s.velocity;
                sc.front_ratio = c.velocity / s.velocity;
                json doc = {{"charge", velocity_fit_document(c)},
                            {"spin", velocity_fit_document(s)},
                            {"ratio", {{"value", *sc.front_ratio}, {"unit", "1"}}}};
                write_text(dir / "fronts.json", doc.dump(2) + "\n");
                files.push_back("fronts.json");
                analyses["fronts"] = "fronts.json";
            }
            clock.stop();
        }

        if ((an.peaks || an.slopes) && !an.spectrum) {
            clock.start("spectrum");
            throw ConfigError("peaks and slopes need a spectrum request");
        }
        if (an.spectrum) {
            clock.start("spectrum");
            const auto& req = *an.spectrum;
            double ref = 0.0;
            if (req.reference_frequency) {
                ref = *req.reference_frequency;
            } else if (req.source == SpectralSource::psi1 || req.source == SpectralSource::psi2) {
                ref = condensate_frequency(traj, req.source == SpectralSource::psi1 ? 1 : 2);
            }
            const SpectralMap map = spectral_function(traj, req.source, req.window, ref);
            AxisScale scale;
            if (an.figure_units) {
                if (!z0) throw ConfigError("figure units need analysis.z0");
                scale.q = pi / *z0;
                scale.omega = scale.q * 2.0 * std::sqrt(2.0 / 5.0) * lutt.u[0];
            }
            json meta = {{"source", to_string(req.source)},
                         {"window", to_string(req.window)},
                         {"reference_frequency", ref},
                         {"axes", an.figure_units ? "figure" : "natural"},
                         {"q_scale", scale.q},
                         {"omega_scale", scale.omega},
                         {"detection_q", z0 ? json(2.0 * pi / *z0 / scale.q) : json(nullptr)}};
            analyses["spectrum"] = meta;
            if (config.output.spectrum && !options.reduced) {
                write_spectrum_csv(dir / "spectrum.csv", map, req.export_q_max, scale);
                files.push_back("spectrum.csv");
                write_text(dir / "spectrum.meta.json", meta.dump(2) + "\n");
                files.push_back("spectrum.meta.json");
            }
            clock.stop();

            if (an.peaks) {
                clock.start("peaks");
                std::vector<double> qs = an.peaks->q;
                if (qs.empty()) {
                    if (!z0) throw ConfigError("peak cut needs q values or analysis.z0");
                    qs.push_back(2.0 * pi / *z0);
                }
                PeakOptions po;
                po.prominence_fraction = an.peaks->prominence;
                if (an.peaks->omega_min) po.omega_min = *an.peaks->omega_min;
                json cuts = json::array();
                for (std::size_t k = 0; k < qs.size(); ++k) {
                    const PeakCut cut = peak_positions(map, qs[k], po);
                    json peaks = json::array();
                    for (const auto& p : cut.peaks) {
                        peaks.push_back({{"omega", p.omega}, {"intensity", p.intensity}, {"prominence", p.prominence}});
                    }
                    const std::string name = "cut_" + std::to_string(k) + ".csv";
                    json entry = {{"q_requested", cut.q_requested}, {"q", cut.q}, {"q_offset", cut.q_offset},
                                  {"peaks", peaks}};
                    if (!options.reduced) {
                        write_cut_csv(dir / name, map, qs[k], scale);
                        files.push_back(name);
                        entry["file"] = name;
                    }
                    if (k == 0 && cut.peaks.size() == 2) {
                        sc.peak_ratio = cut.peaks[1].omega / cut.peaks[0].omega;
                    } else if (k == 0) {
                        warnings.push_back("cut at q = " + format_double(cut.q) + " has " +
                                           std::to_string(cut.peaks.size()) + " peaks, expected 2");
                    }
                    cuts.push_back(entry);
                }
                write_text(dir / "peaks.json", json{{"units", {{"q", "1/length"}, {"omega", "1/time"}}},
                                                    {"cuts", cuts}}.dump(2) + "\n");
                files.push_back("peaks.json");
                analyses["peaks"] = "peaks.json";
                clock.stop();
            }

            if (an.slopes) {
                clock.start("slopes");
                SlopeOptions so;
                so.q_min = an.slopes->q_min.value_or(0.0);
                if (an.slopes->q_max) {
                    so.q_max = *an.slopes->q_max;
                } else {
                    // Linear regime of the slower branch.
                    const double slow = model.intra[0] - model.v12 > 0.0 ? model.intra[0] - model.v12 : model.intra[0];
                    so.q_max = 0.25 / healing_length(model.mass[0], model.density[0], slow);
                }
                so.min_bin_separation = an.slopes->min_bin_separation;
                if (an.peaks) so.prominence_fraction = an.peaks->prominence;
                const SpectralVelocities v = velocities_from_spectrum(map, so);
                sc.spectral_charge = v.charge.velocity;
                sc.spectral_spin = v.spin.velocity;
                sc.spectral_ratio = v.charge.velocity / v.spin.velocity;
                json doc = {{"charge", velocity_fit_document(v.charge)},
                            {"spin", velocity_fit_document(v.spin)},
                            {"q_used", v.q_used},
                            {"charge_omega", v.charge_omega},
                            {"spin_omega", v.spin_omega},
                            {"q_max", so.q_max}};
                write_text(dir / "velocities.json", doc.dump(2) + "\n");
                files.push_back("velocities.json");
                analyses["slopes"] = "velocities.json";
                clock.stop();
            }
        }

        finish("ok", 0, json(nullptr));
        return result;
    } catch (const Error& e) {
        clock.stop();
        const std::string stage = clock.stage();
        finish("failed", exit_code_for(e),
               json{{"stage", stage}, {"type", error_type(e)}, {"message", e.what()}});
        rethrow_with_prefix("stage " + stage + ": ");
    }
}

PlotTarget plot_target_from_string(const std::string& name) {
    if (name == "densities") return PlotTarget::densities;
    if (name == "spectrum") return PlotTarget::spectrum;
    if (name == "cut") return PlotTarget::cut;
    throw ConfigError("unknown plot target '" + name + "' (expected densities, spectrum or cut)");
}

fs::path emit_plot_data(const fs::path& manifest_path, PlotTarget target, std::optional<double> q,
                        std::optional<fs::path> out) {
    const json manifest = json::parse(read_text(manifest_path));
    const fs::path dir = manifest_path.parent_path();
    auto listed = [&](const std::string& name) {
        for (const auto& f : manifest.at("files")) {
            if (f.at("path") == name) return dir / name;
        }
        throw NotFound("manifest " + manifest_path.string() + " lists no " + name);
    };
    switch (target) {
    case PlotTarget::densities: {
        const fs::path src = listed("densities.csv");
        const fs::path dst = out.value_or(dir / "plot_densities.csv");
        write_text(dst, read_text(src));
        return dst;
    }
    case PlotTarget::spectrum: {
        const fs::path src = listed("spectrum.csv");
        const fs::path dst = out.value_or(dir / "plot_spectrum.csv");
        write_text(dst, read_text(src));
        return dst;
    }
    case PlotTarget::cut: {
        const fs::path src = listed("spectrum.csv");
        if (!q) {
            const auto& spec = manifest.at("analyses").value("spectrum", json::object());
            if (!spec.contains("detection_q") || spec["detection_q"].is_null()) {
                throw ConfigError("no q given and the manifest records no detection wavenumber");
            }
            q = spec["detection_q"].get<double>();
        }
        const SpectralMap map = read_spectrum_csv(src);
        const fs::path dst = out.value_or(dir / ("plot_cut_q" + format_double(*q) + ".csv"));
        write_cut_csv(dst, map, *q);
        return dst;
    }
    }
    throw ConfigError("unknown plot target");
}

} // namespace spincharge
