#pragma once

#include <filesystem>

#include <json.hpp>

#include "flowforge/camera.hpp"
#include "flowforge/trajectory.hpp"

namespace flowforge {

nlohmann::json to_json(const CameraIntrinsics& intr);
nlohmann::json to_json(const CameraPose& pose);
nlohmann::json to_json(const Trajectory& traj);
nlohmann::json to_json(const NurbsSpec& spec);

CameraIntrinsics intrinsics_from_json(const nlohmann::json& j);
CameraPose pose_from_json(const nlohmann::json& j);
Trajectory trajectory_from_json(const nlohmann::json& j);
NurbsSpec nurbs_from_json(const nlohmann::json& j);

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory load_trajectory(const std::filesystem::path& path);

nlohmann::json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace flowforge
