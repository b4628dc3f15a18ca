#pragma once

// Cartesian parameter sweeps over config keys.

#include "spincharge/runner.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace spincharge {

/// key is a dotted path into the config document, optionally indexed, e.g.
/// "quantum_optics.delta2" or "quantum_optics.delta2[0]". A scalar value
/// assigned to an array key is broadcast to every element.
struct SweepAxis {
    std::string key;
    std::vector<nlohmann::json> values;
};

/// Parses "key=v1,v2,..."; each value is read as JSON when possible, else as text.
SweepAxis parse_axis(const std::string& text);

struct SweepOptions {
    std::filesystem::path out_dir = "sweep";
    std::size_t workers = 1;
    std::size_t limit = 10000;
    RunOptions run; ///< out_dir is replaced per point
};

struct SweepRow {
    std::size_t index = 0;
    std::vector<nlohmann::json> values;
    std::string status; ///< ok, invalid, failed
    int exit_code = 0;
    std::string error;
    RunScalars scalars;
};

struct SweepTable {
    std::vector<std::string> axes;
    std::vector<SweepRow> rows;
    std::filesystem::path csv;
};

/// Sets `key` in a config document; throws NotFound if the path does not exist.
void set_config_key(nlohmann::json& document, const std::string& key, const nlohmann::json& value);

/// Runs every point of the product (reduced outputs, one point_NNNN
/// subdirectory each) and writes sweep.csv. Failed points stay in the table.
SweepTable sweep(const ExperimentConfig& base, const std::vector<SweepAxis>& axes,
                 const SweepOptions& options = {});

} // namespace spincharge
