#include "spincharge/io.hpp"

#include "spincharge/errors.hpp"
#include "spincharge/version.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace spincharge {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "binary trajectory I/O assumes a little-endian host");

namespace {

json tagged(double value, const char* unit) { return json{{"value", value}, {"unit", unit}}; }
json tagged(const std::string& value, const char* unit) { return json{{"value", value}, {"unit", unit}}; }

void append(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

double parse_double(std::string_view text, const fs::path& path, std::size_t line) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        std::ostringstream os;
        os << path.string() << ":" << line << ": cannot parse number '" << text << "'";
        throw ConfigError(os.str());
    }
    return v;
}

// Numeric rows of a CSV file, skipping '#' comments and the header.
std::vector<std::vector<double>> read_rows(const fs::path& path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw NotFound("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            row.push_back(parse_double(rest.substr(0, comma), path, line_no));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (row.size() != columns) {
            std::ostringstream os;
            os << path.string() << ":" << line_no << ": expected " << columns << " columns, got " << row.size();
            throw ConfigError(os.str());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

template <class T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <class T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof value);
    if (!in) throw ConfigError("truncated binary trajectory");
    return value;
}

} // namespace

std::string format_double(double value) {
    std::string s;
    append(s, value);
    return s;
}

json effective_model_document(const EffectiveModel& model, const LuttingerParams& luttinger,
                              const ValidityReport* validity, const Pair* gamma_max) {
    json doc = json::object();
    for (int i = 0; i < 2; ++i) {
        const std::string c = std::to_string(i + 1);
        doc["mass_" + c] = tagged(model.mass[i], "mass");
        doc["intra_" + c] = tagged(model.intra[i], "energy*length");
        doc["density_" + c] = tagged(model.density[i], "1/length");
        doc["group_velocity_" + c] = tagged(model.group_velocity[i], "length/time");
        doc["mixing_angle_" + std::string(i == 0 ? "a" : "b")] = tagged(model.mixing_angle[i], "rad");
        doc["u_" + c] = tagged(luttinger.u[i], "length/time");
        doc["K_" + c] = tagged(luttinger.K[i], "1");
        doc["gamma_" + c] = tagged(luttinger.gamma[i], "1");
    }
    doc["v1"] = tagged(model.v1, "energy*length");
    doc["v2"] = tagged(model.v2, "energy*length");
    doc["v12"] = tagged(model.v12, "energy*length");
    doc["separation_status"] =
        tagged(luttinger.status == SeparationStatus::separated ? "separated" : "unmatched", "-");
    if (luttinger.velocities) {
        doc["u_charge"] = tagged(luttinger.velocities->charge, "length/time");
        doc["u_spin"] = tagged(luttinger.velocities->spin, "length/time");
        doc["u_charge_over_u_spin"] = tagged(luttinger.velocities->charge / luttinger.velocities->spin, "1");
    }
    if (gamma_max) {
        doc["gamma_max_1"] = tagged((*gamma_max)[0], "1 (depends on gamma0, beta)");
        doc["gamma_max_2"] = tagged((*gamma_max)[1], "1 (depends on gamma0, beta)");
    }
    if (validity) {
        for (const auto& e : validity->entries) {
            const std::string p = "validity." + e.name + ".";
            doc[p + "lhs"] = tagged(e.lhs, "1");
            doc[p + "rhs"] = tagged(e.rhs, "1");
            doc[p + "ratio"] = tagged(e.ratio, "1");
            doc[p + "status"] = tagged(to_string(e.status), "-");
        }
        doc["validity.overall"] = tagged(to_string(validity->overall), "-");
    }
    return doc;
}

json velocity_fit_document(const VelocityFit& fit) {
    json doc = json::object();
    doc["branch"] = tagged(to_string(fit.branch), "-");
    doc["method"] = tagged(to_string(fit.method), "-");
    doc["velocity"] = tagged(fit.velocity, "length/time");
    doc["residual"] = tagged(fit.residual, "1 (normalized RMS)");
    doc["t_begin"] = tagged(fit.t_begin, "time");
    doc["t_end"] = tagged(fit.t_end, "time");
    doc["samples"] = tagged(static_cast<double>(fit.times.size()), "count");
    return doc;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_trajectory_csv(const fs::path& path, const Trajectory& trajectory) {
    std::string out = "# units: t=time z=length psi=length^-1/2\nt,z,re_psi1,im_psi1,re_psi2,im_psi2\n";
    const Grid& grid = trajectory.grid;
    for (std::size_t s = 0; s < trajectory.snapshots.size(); ++s) {
        const auto& snap = trajectory.snapshots[s];
        for (std::size_t j = 0; j < grid.points(); ++j) {
            append(out, trajectory.times[s]);
            out += ',';
            append(out, grid.position(j));
            out += ',';
            append(out, snap.psi1[j].real());
            out += ',';
            append(out, snap.psi1[j].imag());
            out += ',';
            append(out, snap.psi2[j].real());
            out += ',';
            append(out, snap.psi2[j].imag());
            out += '\n';
        }
    }
    write_text(path, out);
}

Trajectory read_trajectory_csv(const fs::path& path, std::optional<double> length) {
    const auto rows = read_rows(path, 6);
    if (rows.empty()) throw ConfigError(path.string() + ": no samples");
    std::size_t n = 0;
    while (n < rows.size() && rows[n][0] == rows[0][0]) ++n;
    if (rows.size() % n != 0) throw ConfigError(path.string() + ": ragged trajectory");
    const double dz = n > 1 ? rows[1][1] - rows[0][1] : 1.0;
    Trajectory traj;
    traj.grid = Grid(n, length.value_or(dz * static_cast<double>(n)));
    for (std::size_t base = 0; base < rows.size(); base += n) {
        FieldState s;
        s.time = rows[base][0];
        s.psi1.resize(n);
        s.psi2.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const auto& r = rows[base + j];
            s.psi1[j] = {r[2], r[3]};
            s.psi2[j] = {r[4], r[5]};
        }
        traj.times.push_back(s.time);
        traj.snapshots.push_back(std::move(s));
    }
    return traj;
}

json trajectory_metadata(const Trajectory& trajectory, const RampSchedule& schedule) {
    json stages = json::array();
    for (const auto& m : trajectory.stages) {
        stages.push_back({{"stage", to_string(m.stage)}, {"begin", m.begin}, {"end", m.end}});
    }
    json diag = json::array();
    for (std::size_t s = 0; s < trajectory.diagnostics.size(); ++s) {
        const auto& d = trajectory.diagnostics[s];
        diag.push_back({trajectory.times[s], d.norm1, d.norm2, d.energy});
    }
    const Couplings start = schedule.at(schedule.start_time());
    const Couplings end = schedule.at(schedule.end_time());
    return json{
        {"grid", {{"points", trajectory.grid.points()}, {"length", trajectory.grid.length()}, {"periodic", true}}},
        {"masses", {trajectory.masses[0], trajectory.masses[1]}},
        {"schedule",
         {{"stages", stages},
          {"initial", {{"intra", {start.intra[0], start.intra[1]}}, {"inter", start.inter}}},
          {"final", {{"intra", {end.intra[0], end.intra[1]}}, {"inter", end.inter}}}}},
        {"dt", trajectory.dt},
        {"sample_every", trajectory.sample_every},
        {"samples", trajectory.times.size()},
        {"diagnostics_columns", {"t", "norm1", "norm2", "energy"}},
        {"diagnostics", diag},
        {"units", {{"t", "time"}, {"z", "length"}, {"psi", "length^-1/2"}, {"hbar", 1}, {"Gamma", 1}}},
        {"version", version_string()},
    };
}

void write_trajectory_binary(const fs::path& path, const Trajectory& trajectory) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(trajectory_magic, sizeof trajectory_magic);
    put<std::uint32_t>(out, trajectory_format_version);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(trajectory.grid.points()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(trajectory.snapshots.size()));
    put<std::uint32_t>(out, 0);
    put<double>(out, trajectory.grid.length());
    for (std::size_t s = 0; s < trajectory.snapshots.size(); ++s) {
        put<double>(out, trajectory.times[s]);
        const auto& snap = trajectory.snapshots[s];
        for (std::size_t j = 0; j < trajectory.grid.points(); ++j) {
            put<double>(out, snap.psi1[j].real());
            put<double>(out, snap.psi1[j].imag());
            put<double>(out, snap.psi2[j].real());
            put<double>(out, snap.psi2[j].imag());
        }
    }
    if (!out) throw Error("write failed for " + path.string());
}

Trajectory read_trajectory_binary(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFound("cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, trajectory_magic, sizeof magic) != 0) {
        throw ConfigError(path.string() + ": not a trajectory file");
    }
    const auto version = get<std::uint32_t>(in);
    if (version != trajectory_format_version) {
        throw ConfigError(path.string() + ": unsupported trajectory version " + std::to_string(version));
    }
    const auto n = get<std::uint32_t>(in);
    const auto samples = get<std::uint32_t>(in);
    get<std::uint32_t>(in);
    const auto length = get<double>(in);
    Trajectory traj;
    traj.grid = Grid(n, length);
    for (std::uint32_t s = 0; s < samples; ++s) {
        FieldState st;
        st.time = get<double>(in);
        st.psi1.resize(n);
        st.psi2.resize(n);
        for (std::uint32_t j = 0; j < n; ++j) {
            const double a = get<double>(in);
            const double b = get<double>(in);
            const double c = get<double>(in);
            const double d = get<double>(in);
            st.psi1[j] = {a, b};
            st.psi2[j] = {c, d};
        }
        traj.times.push_back(st.time);
        traj.snapshots.push_back(std::move(st));
    }
    return traj;
}

void write_density_csv(const fs::path& path, const DensityWaves& waves) {
    std::string out = "# units: t=time z=length n=1/length\nt,z,n1,n2,nc,ns\n";
    for (std::size_t s = 0; s < waves.times.size(); ++s) {
        for (std::size_t j = 0; j < waves.grid.points(); ++j) {
            append(out, waves.times[s]);
            out += ',';
            append(out, waves.grid.position(j));
            out += ',';
            append(out, waves.n1[s][j]);
            out += ',';
            append(out, waves.n2[s][j]);
            out += ',';
            append(out, waves.charge[s][j]);
            out += ',';
            append(out, waves.spin[s][j]);
            out += '\n';
        }
    }
    write_text(path, out);
}

void write_spectrum_csv(const fs::path& path, const SpectralMap& map, std::optional<double> q_max,
                        AxisScale scale) {
    std::string out = "# units: q=1/length omega=1/time S=arbitrary";
    if (scale.q != 1.0 || scale.omega != 1.0) {
        out += " (rescaled: q/" + format_double(scale.q) + " omega/" + format_double(scale.omega) + ")";
    }
    out += "\nq,omega,S\n";
    for (std::size_t iq = 0; iq < map.q.size(); ++iq) {
        if (q_max && std::abs(map.q[iq]) > *q_max) continue;
        for (std::size_t iw = 0; iw < map.omega.size(); ++iw) {
            append(out, map.q[iq] / scale.q);
            out += ',';
            append(out, map.omega[iw] / scale.omega);
            out += ',';
            append(out, map.at(iq, iw));
            out += '\n';
        }
    }
    write_text(path, out);
}

SpectralMap read_spectrum_csv(const fs::path& path) {
    const auto rows = read_rows(path, 3);
    if (rows.empty()) throw NoSignal(path.string() + ": empty spectrum");
    SpectralMap map;
    std::size_t nw = 0;
    while (nw < rows.size() && rows[nw][0] == rows[0][0]) ++nw;
    if (rows.size() % nw != 0) throw ConfigError(path.string() + ": ragged spectrum");
    for (std::size_t i = 0; i < nw; ++i) map.omega.push_back(rows[i][1]);
    for (std::size_t base = 0; base < rows.size(); base += nw) {
        map.q.push_back(rows[base][0]);
        for (std::size_t i = 0; i < nw; ++i) map.intensity.push_back(rows[base + i][2]);
    }
    return map;
}

void write_cut_csv(const fs::path& path, const SpectralMap& map, double q, AxisScale scale) {
    const std::size_t iq = map.nearest_q(q);
    std::string out = "# units: omega=1/time S=arbitrary; q=" + format_double(map.q[iq] / scale.q) +
                      " (requested " + format_double(q / scale.q) + ")\nomega,S\n";
    for (std::size_t iw = 0; iw < map.omega.size(); ++iw) {
        append(out, map.omega[iw] / scale.omega);
        out += ',';
        append(out, map.at(iq, iw));
        out += '\n';
    }
    write_text(path, out);
}

std::string sha256_file(const fs::path& path) {
    const std::string data = read_text(path);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

} // namespace spincharge
