#include "spincharge/config.hpp"

#include "spincharge/errors.hpp"
#include "spincharge/io.hpp"

#include <set>
#include <sstream>

namespace spincharge {

using nlohmann::json;

namespace {

// Typed access to one JSON object that records which keys were consumed, so
// leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) fail("", "expected an object");
    }

    bool has(const std::string& key) const { return object_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return object_.at(key);
    }

    double number(const std::string& key) {
        const json& v = require(key);
        if (!v.is_number()) fail(key, "expected a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
    std::optional<double> optional_number(const std::string& key) {
        if (!has(key) || object_.at(key).is_null()) {
            seen_.insert(key);
            return std::nullopt;
        }
        return number(key);
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        if (!has(key)) return fallback;
        const json& v = require(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            fail(key, "expected a non-negative integer");
        }
        return v.get<std::size_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = require(key);
        if (!v.is_boolean()) fail(key, "expected true or false");
        return v.get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) return fallback;
        const json& v = require(key);
        if (!v.is_string()) fail(key, "expected a string");
        return v.get<std::string>();
    }

    Pair pair(const std::string& key) {
        const json& v = require(key);
        if (v.is_number()) return {v.get<double>(), v.get<double>()};
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            fail(key, "expected two numbers (one per component) or a single number");
        }
        return {v[0].get<double>(), v[1].get<double>()};
    }
    std::optional<Pair> optional_pair(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return pair(key);
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = require(key);
        if (v.is_number()) return {v.get<double>()};
        if (!v.is_array()) fail(key, "expected a list of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) fail(key, "expected a list of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

    ObjectReader child(const std::string& key) { return ObjectReader(require(key), join(key)); }

    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        const std::string where = key.empty() ? (path_.empty() ? "<root>" : path_) : join(key);
        throw ConfigError("config key '" + where + "': " + message);
    }

    void finish() const {
        for (auto it = object_.begin(); it != object_.end(); ++it) {
            if (!seen_.count(it.key())) fail(it.key(), "unknown key");
        }
    }

private:
    const json& require(const std::string& key) {
        if (!has(key)) fail(key, "missing required key");
        seen_.insert(key);
        return object_.at(key);
    }

    const json& object_;
    std::string path_;
    std::set<std::string> seen_;
};

json pair_json(const Pair& p) { return json::array({p[0], p[1]}); }

QuantumOpticsConfig read_quantum_optics(ObjectReader r) {
    QuantumOpticsConfig c;
    c.delta2 = r.pair("delta2");
    c.delta4 = r.pair("delta4");
    c.rabi = r.pair("rabi");
    {
        const json& g = r.raw("coupling");
        if (g.is_number()) {
            const double v = g.get<double>();
            c.coupling = {Pair{v, v}, Pair{v, v}};
        } else if (g.is_array() && g.size() == 2 && g[0].is_array() && g[1].is_array() &&
                   g[0].size() == 2 && g[1].size() == 2) {
            for (int i = 0; i < 2; ++i) {
                for (int x = 0; x < 2; ++x) {
                    if (!g[i][x].is_number()) r.fail("coupling", "expected numbers");
                    c.coupling[i][x] = g[i][x].get<double>();
                }
            }
        } else {
            r.fail("coupling", "expected [[g1a, g1b], [g2a, g2b]] or a single number");
        }
    }
    c.atom_density = r.pair("atom_density");
    c.gamma_total = r.number("gamma_total", 1.0);
    c.gamma_1d = r.optional_pair("gamma_1d");
    c.cooperativity = r.optional_pair("cooperativity");
    c.bare_velocity = r.pair("bare_velocity");
    c.photon_number = r.pair("photon_number");
    c.pulse_width = r.pair("pulse_width");
    c.optical_depth = r.optional_pair("optical_depth");
    c.gamma0 = r.number("gamma0", 1.0);
    c.beta = r.number("beta", 1.0);
    const std::string policy = r.text("sign_policy", "repulsive_only");
    if (policy == "repulsive_only") {
        c.sign_policy = SignPolicy::repulsive_only;
    } else if (policy == "unchecked") {
        c.sign_policy = SignPolicy::unchecked;
    } else {
        r.fail("sign_policy", "expected 'repulsive_only' or 'unchecked'");
    }
    r.finish();
    return c;
}

json write_quantum_optics(const QuantumOpticsConfig& c) {
    json j = {
        {"delta2", pair_json(c.delta2)},
        {"delta4", pair_json(c.delta4)},
        {"rabi", pair_json(c.rabi)},
        {"coupling", json::array({pair_json(c.coupling[0]), pair_json(c.coupling[1])})},
        {"atom_density", pair_json(c.atom_density)},
        {"gamma_total", c.gamma_total},
        {"bare_velocity", pair_json(c.bare_velocity)},
        {"photon_number", pair_json(c.photon_number)},
        {"pulse_width", pair_json(c.pulse_width)},
        {"gamma0", c.gamma0},
        {"beta", c.beta},
        {"sign_policy", c.sign_policy == SignPolicy::repulsive_only ? "repulsive_only" : "unchecked"},
    };
    if (c.gamma_1d) j["gamma_1d"] = pair_json(*c.gamma_1d);
    if (c.cooperativity) j["cooperativity"] = pair_json(*c.cooperativity);
    if (c.optical_depth) j["optical_depth"] = pair_json(*c.optical_depth);
    return j;
}

DirectModelSpec read_model(ObjectReader r) {
    DirectModelSpec m;
    m.mass = r.has("mass") ? r.pair("mass") : Pair{1.0, 1.0};
    m.intra = r.pair("intra");
    if (r.has("inter") && (r.has("v1") || r.has("v2"))) {
        r.fail("inter", "give either 'inter' or 'v1'/'v2', not both");
    }
    if (r.has("inter")) {
        const double v12 = r.number("inter");
        m.v1 = 0.5 * v12;
        m.v2 = 0.5 * v12;
    } else {
        m.v1 = r.number("v1", 0.0);
        m.v2 = r.number("v2", 0.0);
    }
    m.density = r.pair("density");
    for (int i = 0; i < 2; ++i) {
        if (!(m.mass[i] > 0.0)) r.fail("mass", "must be positive");
        if (!(m.density[i] > 0.0)) r.fail("density", "must be positive");
    }
    r.finish();
    return m;
}

json write_model(const DirectModelSpec& m) {
    return {{"mass", pair_json(m.mass)},
            {"intra", pair_json(m.intra)},
            {"v1", m.v1},
            {"v2", m.v2},
            {"density", pair_json(m.density)}};
}

Couplings read_couplings(ObjectReader r) {
    Couplings c;
    c.intra = r.pair("intra");
    c.inter = r.number("inter");
    r.finish();
    return c;
}

json write_couplings(const Couplings& c) { return {{"intra", pair_json(c.intra)}, {"inter", c.inter}}; }

InitSpec read_init(ObjectReader r) {
    InitSpec s;
    const std::string mode = r.text("mode", "pulse");
    if (mode == "pulse") {
        s.mode = InitMode::pulse;
    } else if (mode == "background_plus_bump") {
        s.mode = InitMode::background_plus_bump;
    } else if (mode == "vacuum") {
        s.mode = InitMode::vacuum;
    } else {
        r.fail("mode", "expected 'pulse', 'background_plus_bump' or 'vacuum'");
    }
    s.center = r.optional_number("center");
    s.width = r.optional_number("width");
    s.photon_number = r.optional_number("photon_number");
    s.density = r.optional_number("density");
    s.bump_fraction = r.number("bump_fraction", 0.0);
    s.bump_width = r.optional_number("bump_width");
    if (s.bump_fraction < 0.0 || s.bump_fraction > 0.05) r.fail("bump_fraction", "must lie in [0, 0.05]");
    if (s.photon_number && *s.photon_number < 0.0) r.fail("photon_number", "must be non-negative");
    if (s.density && *s.density < 0.0) r.fail("density", "must be non-negative");
    r.finish();
    return s;
}

json write_init(const InitSpec& s) {
    json j;
    switch (s.mode) {
    case InitMode::pulse: j["mode"] = "pulse"; break;
    case InitMode::background_plus_bump: j["mode"] = "background_plus_bump"; break;
    case InitMode::vacuum: j["mode"] = "vacuum"; break;
    }
    if (s.center) j["center"] = *s.center;
    if (s.width) j["width"] = *s.width;
    if (s.photon_number) j["photon_number"] = *s.photon_number;
    if (s.density) j["density"] = *s.density;
    j["bump_fraction"] = s.bump_fraction;
    if (s.bump_width) j["bump_width"] = *s.bump_width;
    return j;
}

ScheduleSpec read_schedule(ObjectReader r) {
    ScheduleSpec s;
    if (r.has("initial")) s.initial = read_couplings(r.child("initial"));
    if (r.has("stages")) {
        const json& stages = r.raw("stages");
        if (!stages.is_array()) r.fail("stages", "expected a list");
        for (std::size_t i = 0; i < stages.size(); ++i) {
            ObjectReader sr(stages[i], r.join("stages[" + std::to_string(i) + "]"));
            StageSpec st;
            try {
                st.stage = stage_from_string(sr.text("stage", ""));
            } catch (const DomainError& e) {
                sr.fail("stage", e.what());
            }
            st.duration = sr.number("duration", 0.0);
            if (!(st.duration >= 0.0)) sr.fail("duration", "must be non-negative");
            if (sr.has("target")) st.target = read_couplings(sr.child("target"));
            sr.finish();
            s.stages.push_back(st);
        }
    }
    r.finish();
    return s;
}

json write_schedule(const ScheduleSpec& s) {
    json j = json::object();
    if (s.initial) j["initial"] = write_couplings(*s.initial);
    json stages = json::array();
    for (const auto& st : s.stages) {
        json sj = {{"stage", to_string(st.stage)}, {"duration", st.duration}};
        if (st.target) sj["target"] = write_couplings(*st.target);
        stages.push_back(sj);
    }
    j["stages"] = stages;
    return j;
}

AnalysisSpec read_analysis(ObjectReader r) {
    AnalysisSpec a;
    a.z0 = r.optional_number("z0");
    if (a.z0 && !(*a.z0 > 0.0)) r.fail("z0", "must be positive");
    a.figure_units = r.boolean("figure_units", false);
    if (r.has("fronts")) {
        ObjectReader f = r.child("fronts");
        FrontsRequest req;
        req.t_begin = f.number("t_begin", 0.0);
        req.t_end = f.optional_number("t_end");
        req.origin = f.optional_number("origin");
        f.finish();
        a.fronts = req;
    }
    if (r.has("spectrum")) {
        ObjectReader s = r.child("spectrum");
        SpectrumRequest req;
        try {
            req.source = spectral_source_from_string(s.text("source", "psi1"));
        } catch (const DomainError& e) {
            s.fail("source", e.what());
        }
        try {
            req.window = window_from_string(s.text("window", "hann"));
        } catch (const DomainError& e) {
            s.fail("window", e.what());
        }
        if (s.has("reference_frequency")) {
            const json& v = s.raw("reference_frequency");
            if (v.is_number()) {
                req.reference_frequency = v.get<double>();
            } else if (!(v.is_string() && v.get<std::string>() == "auto")) {
                s.fail("reference_frequency", "expected a number or \"auto\"");
            }
        }
        req.export_q_max = s.optional_number("export_q_max");
        s.finish();
        a.spectrum = req;
    }
    if (r.has("peaks")) {
        ObjectReader p = r.child("peaks");
        PeaksRequest req;
        if (p.has("q")) req.q = p.numbers("q");
        req.prominence = p.number("prominence", 0.05);
        if (p.has("omega_min")) {
            req.omega_min = p.optional_number("omega_min");
        }
        if (!(req.prominence >= 0.0 && req.prominence < 1.0)) p.fail("prominence", "must lie in [0, 1)");
        p.finish();
        a.peaks = req;
    }
    if (r.has("slopes")) {
        ObjectReader s = r.child("slopes");
        SlopesRequest req;
        req.q_min = s.optional_number("q_min");
        req.q_max = s.optional_number("q_max");
        req.min_bin_separation = s.number("min_bin_separation", 3.0);
        s.finish();
        a.slopes = req;
    }
    r.finish();
    return a;
}

json write_analysis(const AnalysisSpec& a) {
    json j = json::object();
    if (a.z0) j["z0"] = *a.z0;
    j["figure_units"] = a.figure_units;
    if (a.fronts) {
        json f = {{"t_begin", a.fronts->t_begin}};
        if (a.fronts->t_end) f["t_end"] = *a.fronts->t_end;
        if (a.fronts->origin) f["origin"] = *a.fronts->origin;
        j["fronts"] = f;
    }
    if (a.spectrum) {
        json s = {{"source", to_string(a.spectrum->source)}, {"window", to_string(a.spectrum->window)}};
        if (a.spectrum->reference_frequency) {
            s["reference_frequency"] = *a.spectrum->reference_frequency;
        } else {
            s["reference_frequency"] = "auto";
        }
        if (a.spectrum->export_q_max) s["export_q_max"] = *a.spectrum->export_q_max;
        j["spectrum"] = s;
    }
    if (a.peaks) {
        json p = {{"q", a.peaks->q}, {"prominence", a.peaks->prominence}};
        p["omega_min"] = a.peaks->omega_min ? json(*a.peaks->omega_min) : json(nullptr);
        j["peaks"] = p;
    }
    if (a.slopes) {
        json s = {{"min_bin_separation", a.slopes->min_bin_separation}};
        if (a.slopes->q_min) s["q_min"] = *a.slopes->q_min;
        if (a.slopes->q_max) s["q_max"] = *a.slopes->q_max;
        j["slopes"] = s;
    }
    return j;
}

} // namespace

std::string to_string(OutputFormat format) { return format == OutputFormat::csv ? "csv" : "binary"; }

OutputFormat output_format_from_string(const std::string& name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "binary") return OutputFormat::binary;
    throw ConfigError("unknown output format '" + name + "' (expected csv or binary)");
}

ExperimentConfig load_config(const json& document) {
    ObjectReader r(document, "");
    ExperimentConfig c;
    const bool has_qo = r.has("quantum_optics");
    const bool has_model = r.has("model");
    if (has_qo == has_model) {
        r.fail("", "exactly one of 'quantum_optics' and 'model' must be given");
    }
    if (has_qo) c.quantum_optics = read_quantum_optics(r.child("quantum_optics"));
    if (has_model) c.model = read_model(r.child("model"));

    if (r.has("grid")) {
        ObjectReader g = r.child("grid");
        GridSpec spec;
        spec.points = g.count("points", 1024);
        spec.length = g.number("length");
        g.finish();
        try {
            Grid check(spec.points, spec.length);
        } catch (const DomainError& e) {
            r.fail("grid", e.what());
        }
        c.grid = spec;
    }
    if (r.has("initial")) {
        const json& init = r.raw("initial");
        if (!init.is_array() || init.size() != 2) r.fail("initial", "expected one entry per component");
        for (std::size_t i = 0; i < 2; ++i) {
            c.initial[i] = read_init(ObjectReader(init[i], "initial[" + std::to_string(i) + "]"));
        }
    }
    if (r.has("schedule")) c.schedule = read_schedule(r.child("schedule"));
    if (r.has("integration")) {
        ObjectReader in = r.child("integration");
        c.integration.dt = in.number("dt", 1e-3);
        c.integration.t_final = in.optional_number("t_final");
        c.integration.sample_every = in.count("sample_every", 10);
        in.finish();
        if (!(c.integration.dt > 0.0)) r.fail("integration.dt", "must be positive");
        if (c.integration.sample_every < 1) r.fail("integration.sample_every", "must be at least 1");
        if (c.integration.t_final && *c.integration.t_final < 0.0) {
            r.fail("integration.t_final", "must be non-negative");
        }
    }
    if (r.has("analysis")) c.analysis = read_analysis(r.child("analysis"));
    if (r.has("output")) {
        ObjectReader o = r.child("output");
        c.output.directory = o.text("directory", "out");
        try {
            c.output.format = output_format_from_string(o.text("format", "csv"));
        } catch (const ConfigError& e) {
            o.fail("format", e.what());
        }
        c.output.trajectory = o.boolean("trajectory", true);
        c.output.densities = o.boolean("densities", true);
        c.output.spectrum = o.boolean("spectrum", true);
        o.finish();
    }
    c.seed = r.count("seed", 0);
    c.allow_invalid = r.boolean("allow_invalid", false);
    r.finish();
    return c;
}

ExperimentConfig load_config(const std::string& document) {
    json parsed;
    try {
        parsed = json::parse(document);
    } catch (const json::parse_error& e) {
        std::ostringstream os;
        os << "config parse error at byte " << e.byte << ": " << e.what();
        throw ConfigError(os.str());
    }
    return load_config(parsed);
}

ExperimentConfig load_config_file(const std::string& path) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const NotFound& e) {
        throw ConfigError(e.what());
    }
    return load_config(text);
}

json to_json(const ExperimentConfig& c) {
    json j = json::object();
    if (c.quantum_optics) j["quantum_optics"] = write_quantum_optics(*c.quantum_optics);
    if (c.model) j["model"] = write_model(*c.model);
    if (c.grid) j["grid"] = {{"points", c.grid->points}, {"length", c.grid->length}};
    j["initial"] = json::array({write_init(c.initial[0]), write_init(c.initial[1])});
    if (c.schedule) j["schedule"] = write_schedule(*c.schedule);
    json integ = {{"dt", c.integration.dt}, {"sample_every", c.integration.sample_every}};
    if (c.integration.t_final) integ["t_final"] = *c.integration.t_final;
    j["integration"] = integ;
    j["analysis"] = write_analysis(c.analysis);
    j["output"] = {{"directory", c.output.directory},
                   {"format", to_string(c.output.format)},
                   {"trajectory", c.output.trajectory},
                   {"densities", c.output.densities},
                   {"spectrum", c.output.spectrum}};
    j["seed"] = c.seed;
    j["allow_invalid"] = c.allow_invalid;
    return j;
}

} // namespace spincharge
