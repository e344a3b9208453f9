#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace flowforge {

// One clip of the training corpus. Paths are relative to the manifest's
// directory. "real" entries carry flow estimated from their frames, the
// stand-in for sensor data; "synthetic" entries carry exact rendered flow.
struct ManifestEntry {
    std::string id;
    std::string source;  // "real" | "synthetic"
    std::vector<std::string> flow_paths;           // forward, one per frame pair
    std::vector<std::string> flow_backward_paths;  // matching backward flows
    std::vector<std::string> frame_paths;
    std::string trajectory_path;
    bool kept = true;
    double error = 0.0;  // cycle-consistency score, pixels
    nlohmann::json extra = nlohmann::json::object();  // unknown keys, preserved on rewrite
};

struct DatasetManifest {
    double scale_factor_px = 0.0;
    std::vector<ManifestEntry> entries;
    nlohmann::json extra = nlohmann::json::object();

    static DatasetManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    nlohmann::json to_json() const;
    static DatasetManifest from_json(const nlohmann::json& j);
};

}  // namespace flowforge
