#include "spincharge/sweep.hpp"

#include "spincharge/errors.hpp"
#include "spincharge/io.hpp"

#include <atomic>
#include <cstdio>
#include <functional>
#include <regex>
#include <sstream>
#include <thread>

namespace spincharge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct PathPart {
    std::string name;
    std::optional<std::size_t> index;
};

std::vector<PathPart> split_key(const std::string& key) {
    static const std::regex part(R"(([A-Za-z_][A-Za-z0-9_]*)(?:\[(\d+)\])?)");
    std::vector<PathPart> parts;
    std::stringstream ss(key);
    std::string item;
    while (std::getline(ss, item, '.')) {
        std::smatch m;
        if (!std::regex_match(item, m, part)) throw ConfigError("malformed sweep key '" + key + "'");
        PathPart p{m[1].str(), std::nullopt};
        if (m[2].matched) p.index = std::stoul(m[2].str());
        parts.push_back(p);
    }
    if (parts.empty()) throw ConfigError("empty sweep key");
    return parts;
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\n") == std::string::npos) return text;
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string value_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return format_double(v.get<double>());
    return v.dump();
}

std::string opt_text(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

} // namespace

SweepAxis parse_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
        throw ConfigError("axis must look like key=v1,v2,... (got '" + text + "')");
    }
    SweepAxis axis;
    axis.key = text.substr(0, eq);
    std::stringstream ss(text.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
        json v = json::parse(item, nullptr, false);
        axis.values.push_back(v.is_discarded() ? json(item) : v);
    }
    if (axis.values.empty()) throw ConfigError("axis '" + axis.key + "' has no values");
    return axis;
}

void set_config_key(json& document, const std::string& key, const json& value) {
    const auto parts = split_key(key);
    json* node = &document;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& p = parts[i];
        if (!node->is_object() || !node->contains(p.name)) throw NotFound("config key '" + key + "' not found");
        node = &(*node)[p.name];
        if (p.index) {
            if (!node->is_array() || *p.index >= node->size()) {
                throw NotFound("config key '" + key + "' index out of range");
            }
            node = &(*node)[*p.index];
        }
    }
    if (node->is_array() && !value.is_array()) {
        std::function<void(json&)> broadcast = [&](json& n) {
            if (n.is_array()) {
                for (auto& x : n) broadcast(x);
            } else {
                n = value;
            }
        };
        broadcast(*node);
    } else {
        *node = value;
    }
}

SweepTable sweep(const ExperimentConfig& base, const std::vector<SweepAxis>& axes, const SweepOptions& options) {
    const json base_doc = to_json(base);
    std::size_t total = 1;
    for (const auto& a : axes) {
        if (a.values.empty()) throw ConfigError("axis '" + a.key + "' has no values");
        json probe = base_doc;
        set_config_key(probe, a.key, a.values.front());
        if (total * a.values.size() > options.limit) {
            throw ConfigError("sweep has more than " + std::to_string(options.limit) + " points");
        }
        total *= a.values.size();
    }

    SweepTable table;
    for (const auto& a : axes) table.axes.push_back(a.key);
    table.rows.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        auto& row = table.rows[i];
        row.index = i;
        std::size_t rest = i;
        row.values.resize(axes.size());
        for (std::size_t k = axes.size(); k-- > 0;) {
            row.values[k] = axes[k].values[rest % axes[k].values.size()];
            rest /= axes[k].values.size();
        }
    }

    fs::create_directories(options.out_dir);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            auto& row = table.rows[i];
            char name[32];
            std::snprintf(name, sizeof name, "point_%04zu", i);
            RunOptions ro = options.run;
            ro.out_dir = options.out_dir / name;
            ro.reduced = true;
            try {
                json doc = base_doc;
                for (std::size_t k = 0; k < axes.size(); ++k) set_config_key(doc, axes[k].key, row.values[k]);
                const ExperimentConfig cfg = load_config(doc);
                const RunManifest m = run_experiment(cfg, ro);
                row.status = m.status;
                row.exit_code = m.exit_code;
                row.scalars = m.scalars;
            } catch (const std::exception& e) {
                row.status = "failed";
                row.exit_code = exit_code_for(e);
                row.error = e.what();
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, total));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::string out = "point";
    for (const auto& a : axes) out += "," + csv_field(a.key);
    out += ",status,exit_code,gamma_max_1,gamma_max_2,u_charge_over_u_spin,front_velocity_ratio,"
           "spectral_velocity_ratio,worst_validity_ratio,validity_status,error\n";
    for (const auto& r : table.rows) {
        out += std::to_string(r.index);
        for (const auto& v : r.values) out += "," + csv_field(value_text(v));
        const auto& s = r.scalars;
        out += "," + r.status + "," + std::to_string(r.exit_code);
        out += "," + (s.gamma_max ? format_double((*s.gamma_max)[0]) : std::string());
        out += "," + (s.gamma_max ? format_double((*s.gamma_max)[1]) : std::string());
        out += "," + opt_text(s.analytic_ratio) + "," + opt_text(s.front_ratio) + "," + opt_text(s.spectral_ratio);
        out += "," + (r.status == "failed" ? std::string() : format_double(s.worst_validity_ratio));
        out += "," + (r.status == "failed" ? std::string() : s.validity_status);
        out += "," + csv_field(r.error) + "\n";
    }
    table.csv = options.out_dir / "sweep.csv";
    write_text(table.csv, out);
    return table;
}

} // namespace spincharge
