// spincharge: map quantum-optics knobs to model parameters, run staged
// simulations, sweep parameters and export plot data.

#include "spincharge/errors.hpp"
#include "spincharge/runner.hpp"
#include "spincharge/sweep.hpp"
#include "spincharge/version.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace spincharge;

namespace {

struct Common {
    std::string out;
    std::optional<double> dt;
    bool allow_invalid = false;
    std::string format;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--out", c.out, "output directory (default: the config's output.directory)")
        ->envname("SPINCHARGE_OUT");
    cmd->add_option("--dt", c.dt, "override the integration time step")->check(CLI::PositiveNumber);
    cmd->add_flag("--allow-invalid", c.allow_invalid, "continue when the validity check fails");
    cmd->add_option("--format", c.format, "trajectory format")->check(CLI::IsMember({"csv", "binary"}));
}

RunOptions run_options(const Common& c) {
    RunOptions o;
    if (!c.out.empty()) o.out_dir = c.out;
    o.dt = c.dt;
    o.allow_invalid = c.allow_invalid;
    if (!c.format.empty()) o.format = output_format_from_string(c.format);
    return o;
}

void print_summary(const RunManifest& m) {
    std::cout << "status: " << m.status << "\nmanifest: " << m.path.string() << "\n";
    const auto& s = m.document.at("scalars");
    for (auto it = s.begin(); it != s.end(); ++it) {
        if (!it.value().is_null()) std::cout << "  " << it.key() << " = " << it.value().dump() << "\n";
    }
    for (const auto& w : m.document.at("warnings")) std::cout << "warning: " << w.get<std::string>() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-component polariton Lieb-Liniger simulator.\n\n"
                 "Environment:\n"
                 "  SPINCHARGE_OUT      default for --out\n"
                 "  SPINCHARGE_WORKERS  default for sweep --workers\n\n"
                 "Exit codes: 0 success, 1 usage/config error, 2 validity failure, 3 numerical failure."};
    app.set_version_flag("--version", std::string(version_string()));
    app.require_subcommand(1);

    Common common;
    std::string config_path;

    auto* map_cmd = app.add_subcommand("map-params", "effective model and validity report only");
    map_cmd->add_option("config", config_path, "config file")->required();
    add_common(map_cmd, common);

    auto* sim_cmd = app.add_subcommand("simulate", "full pipeline: evolve, analyze, write artifacts");
    sim_cmd->add_option("config", config_path, "config file")->required();
    add_common(sim_cmd, common);

    std::vector<std::string> axes;
    std::size_t workers = 1;
    std::size_t limit = 10000;
    bool sweep_map_only = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "run the Cartesian product of --axis values");
    sweep_cmd->add_option("config", config_path, "template config file")->required();
    sweep_cmd->add_option("--axis", axes, "key=v1,v2,... (repeatable)")->required();
    sweep_cmd->add_option("--workers", workers, "concurrent points")
        ->envname("SPINCHARGE_WORKERS")
        ->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--limit", limit, "maximum number of points");
    sweep_cmd->add_flag("--map-only", sweep_map_only, "skip the dynamics at every point");
    add_common(sweep_cmd, common);

    std::string manifest_path;
    std::optional<double> q;
    std::string target = "cut";
    std::string plot_out;
    auto* cut_cmd = app.add_subcommand("cut", "export plot data (default: S(q, omega) cut) from a run");
    cut_cmd->add_option("manifest", manifest_path, "manifest.json of a run")->required();
    cut_cmd->add_option("--q", q, "cut wavenumber in exported units (default 2*pi/z0)");
    cut_cmd->add_option("--target", target, "densities, spectrum or cut")
        ->check(CLI::IsMember({"densities", "spectrum", "cut"}));
    cut_cmd->add_option("--out", plot_out, "output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*cut_cmd) {
            std::optional<std::filesystem::path> out;
            if (!plot_out.empty()) out = plot_out;
            const auto path = emit_plot_data(manifest_path, plot_target_from_string(target), q, out);
            std::cout << path.string() << "\n";
            return 0;
        }
        const ExperimentConfig config = load_config_file(config_path);
        RunOptions options = run_options(common);
        if (*sweep_cmd) {
            std::vector<SweepAxis> parsed;
            for (const auto& a : axes) parsed.push_back(parse_axis(a));
            SweepOptions so;
            so.out_dir = common.out.empty() ? std::filesystem::path(config.output.directory) : std::filesystem::path(common.out);
            so.workers = workers;
            so.limit = limit;
            options.map_only = sweep_map_only;
            so.run = options;
            const SweepTable table = sweep(config, parsed, so);
            std::size_t failed = 0;
            for (const auto& r : table.rows) failed += r.status == "failed";
            std::cout << table.rows.size() << " points, " << failed << " failed\n" << table.csv.string() << "\n";
            return 0;
        }
        options.map_only = static_cast<bool>(*map_cmd);
        const RunManifest m = run_experiment(config, options);
        print_summary(m);
        return m.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}
