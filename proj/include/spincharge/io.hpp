#pragma once

// File formats: unit-tagged JSON documents, CSV exports with a leading
// "# units:" comment line, and a little-endian binary trajectory format.

#include "spincharge/analysis.hpp"
#include "spincharge/dynamics.hpp"
#include "spincharge/effective_model.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace spincharge {

/// Flat key-value document; every value is {"value": ..., "unit": ...}.
nlohmann::json effective_model_document(const EffectiveModel& model, const LuttingerParams& luttinger,
                                        const ValidityReport* validity = nullptr,
                                        const Pair* gamma_max = nullptr);

nlohmann::json velocity_fit_document(const VelocityFit& fit);

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Rows (t, z, re_psi1, im_psi1, re_psi2, im_psi2) for every sample.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);
/// Reconstructs times, snapshots and grid (length from the sidecar if given,
/// otherwise n·dz inferred from the z column).
Trajectory read_trajectory_csv(const std::filesystem::path& path, std::optional<double> length = {});

nlohmann::json trajectory_metadata(const Trajectory& trajectory, const RampSchedule& schedule);

inline constexpr char trajectory_magic[8] = {'S', 'C', 'T', 'R', 'A', 'J', '0', '1'};
inline constexpr std::uint32_t trajectory_format_version = 1;

/// Header: magic[8], u32 version, u32 n_points, u32 n_samples, u32 reserved,
/// f64 length. Then per sample: f64 t, n_points × (re1, im1, re2, im2) f64.
void write_trajectory_binary(const std::filesystem::path& path, const Trajectory& trajectory);
Trajectory read_trajectory_binary(const std::filesystem::path& path);

/// Rows (t, z, n1, n2, nc, ns).
void write_density_csv(const std::filesystem::path& path, const DensityWaves& waves);

struct AxisScale {
    double q = 1.0;     ///< exported q = q / scale.q
    double omega = 1.0; ///< exported ω = ω / scale.omega
};

/// Rows (q, omega, S), optionally restricted to |q| ≤ q_max.
void write_spectrum_csv(const std::filesystem::path& path, const SpectralMap& map,
                        std::optional<double> q_max = {}, AxisScale scale = {});
SpectralMap read_spectrum_csv(const std::filesystem::path& path);

/// Two columns (omega, S) at the q bin nearest q.
void write_cut_csv(const std::filesystem::path& path, const SpectralMap& map, double q,
                   AxisScale scale = {});

std::string sha256_file(const std::filesystem::path& path);

} // namespace spincharge
