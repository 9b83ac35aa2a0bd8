#pragma once

#include "imrom/hbm.hpp"

#include <json.hpp>

#include <string>

namespace imrom {

// Complex coefficients and the realified reduced-order model as one JSON document.
nlohmann::json rom_to_json(const Parametrisation& param, const RealRom& rom);

// Rebuilds the realified model from rom_to_json output (only the "real" part is read).
RealRom rom_from_json(const nlohmann::json& doc);

void write_json(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::string& path);

// One row per continuation point. extra columns are appended as given.
void write_curve_csv(const std::string& path, const ContinuationCurve& curve,
                     const std::vector<std::string>& extra_names,
                     const std::vector<std::vector<double>>& extra_columns);

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const Eigen::MatrixXd& modal);

}  // namespace imrom
