#pragma once

// Config ingestion (JSON), canonical hashing and result persistence.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracspde/dynamics.hpp"
#include "fracspde/experiments.hpp"
#include "fracspde/fractional.hpp"

namespace fracspde {

inline constexpr const char* kToolVersion = "0.1.0";

/// Parses and validates a config document. Unknown or duplicate keys, wrong
/// types and constraint violations throw InvalidParameter naming the key.
SimConfig parse_config_text(const std::string& text);
SimConfig parse_config(const std::filesystem::path& path);

/// Canonical JSON of a config with every default written out.
nlohmann::json config_to_json(const SimConfig& cfg);

/// FNV-1a 64 of the compact canonical JSON, as 16 hex digits.
std::string config_hash(const SimConfig& cfg);

struct RunManifest {
    std::string config_hash;
    std::string tool_version = kToolVersion;
    std::uint64_t base_seed = 0;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;
};

std::string utc_timestamp();
void write_manifest(const RunManifest& manifest, const std::filesystem::path& out_dir);

/// Writes text verbatim, replacing any existing file.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// trajectory.csv, summary.json and one snapshot_<hash8>_<step>.bin per stored
/// snapshot. Returns the file names written.
std::vector<std::string> write_trajectory_outputs(const TrajectoryRecord& rec,
                                                  const std::filesystem::path& out_dir);

std::string trajectory_csv(const TrajectoryRecord& rec);
nlohmann::json trajectory_summary(const TrajectoryRecord& rec);

/// Columns time, level_<N> for each curve; all curves must share their grid.
std::string survival_csv(const std::vector<SurvivalCurve>& curves);
nlohmann::json delay_json(const DelayStudy& study);
nlohmann::json probe_json(const HypothesisReport& report);
nlohmann::json dichotomy_json(double beta, double dt, double t_end,
                              const std::vector<DichotomyRow>& rows);
std::string scalar_trajectory_csv(const ScalarTrajectory& traj);
nlohmann::json scalar_summary(const ScalarTrajectory& traj);

/// Small matplotlib script plotting survival.csv and trajectory.csv when present.
std::string plot_script();

}  // namespace fracspde
