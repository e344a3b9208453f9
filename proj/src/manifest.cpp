#include "flowforge/manifest.hpp"

#include <stdexcept>

#include "flowforge/serialize.hpp"

namespace flowforge {

using nlohmann::json;

namespace {

const char* const kKnownEntryKeys[] = {"id",     "source",     "flow_paths", "flow_backward_paths",
                                       "frame_paths", "trajectory", "kept",       "error"};

bool is_known_entry_key(const std::string& k) {
    for (const char* known : kKnownEntryKeys)
        if (k == known) return true;
    return false;
}

}  // namespace

json DatasetManifest::to_json() const {
    json j = extra.is_object() ? extra : json::object();
    j["scale_factor_px"] = scale_factor_px;
    json jentries = json::array();
    for (const auto& e : entries) {
        json je = e.extra.is_object() ? e.extra : json::object();
        je["id"] = e.id;
        je["source"] = e.source;
        je["flow_paths"] = e.flow_paths;
        je["flow_backward_paths"] = e.flow_backward_paths;
        je["frame_paths"] = e.frame_paths;
        if (!e.trajectory_path.empty()) je["trajectory"] = e.trajectory_path;
        je["kept"] = e.kept;
        je["error"] = e.error;
        jentries.push_back(je);
    }
    j["entries"] = jentries;
    return j;
}

DatasetManifest DatasetManifest::from_json(const json& j) {
    DatasetManifest m;
    m.scale_factor_px = j.value("scale_factor_px", 0.0);
    for (const auto& je : j.at("entries")) {
        ManifestEntry e;
        e.id = je.at("id").get<std::string>();
        e.source = je.at("source").get<std::string>();
        if (e.source != "real" && e.source != "synthetic")
            throw std::runtime_error("manifest: unknown source tag '" + e.source + "'");
        e.flow_paths = je.value("flow_paths", std::vector<std::string>{});
        e.flow_backward_paths = je.value("flow_backward_paths", std::vector<std::string>{});
        e.frame_paths = je.value("frame_paths", std::vector<std::string>{});
        e.trajectory_path = je.value("trajectory", std::string{});
        e.kept = je.value("kept", true);
        e.error = je.value("error", 0.0);
        for (auto it = je.begin(); it != je.end(); ++it)
            if (!is_known_entry_key(it.key())) e.extra[it.key()] = it.value();
        m.entries.push_back(std::move(e));
    }
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "scale_factor_px" && it.key() != "entries") m.extra[it.key()] = it.value();
    return m;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
    return from_json(load_json_file(path));
}

void DatasetManifest::save(const std::filesystem::path& path) const {
    save_json_file(path, to_json());
}

}  // namespace flowforge
