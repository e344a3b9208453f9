#include "flowforge/serialize.hpp"

#include <fstream>

namespace flowforge {

using nlohmann::json;

json to_json(const CameraIntrinsics& intr) {
    return json{{"fx", intr.fx},       {"fy", intr.fy},     {"cx", intr.cx},
                {"cy", intr.cy},       {"width", intr.width}, {"height", intr.height}};
}

json to_json(const CameraPose& pose) {
    json rot = json::array();
    for (double v : pose.rotation.m) rot.push_back(v);
    return json{{"rotation", rot},
                {"position", {pose.position.x, pose.position.y, pose.position.z}}};
}

json to_json(const Trajectory& traj) {
    json frames = json::array();
    for (const auto& f : traj.frames) {
        json jf = to_json(f.pose);
        jf["n"] = f.n;
        frames.push_back(jf);
    }
    return json{{"intrinsics", to_json(traj.intrinsics)}, {"frames", frames}};
}

json to_json(const NurbsSpec& spec) {
    json pts = json::array();
    for (const auto& p : spec.control_points) pts.push_back({p.x, p.y, p.z});
    return json{{"control_points", pts},
                {"weights", spec.weights},
                {"degree", spec.degree},
                {"knots", spec.knots}};
}

CameraIntrinsics intrinsics_from_json(const json& j) {
    CameraIntrinsics intr;
    intr.fx = j.at("fx").get<double>();
    intr.fy = j.at("fy").get<double>();
    intr.cx = j.at("cx").get<double>();
    intr.cy = j.at("cy").get<double>();
    intr.width = j.at("width").get<int>();
    intr.height = j.at("height").get<int>();
    intr.validate();
    return intr;
}

CameraPose pose_from_json(const json& j) {
    CameraPose pose;
    const auto& rot = j.at("rotation");
    if (rot.size() != 9) throw std::invalid_argument("pose json: rotation must have 9 entries");
    for (int i = 0; i < 9; ++i) pose.rotation.m[static_cast<std::size_t>(i)] = rot[i].get<double>();
    const auto& p = j.at("position");
    if (p.size() != 3) throw std::invalid_argument("pose json: position must have 3 entries");
    pose.position = Vec3{p[0].get<double>(), p[1].get<double>(), p[2].get<double>()};
    pose.validate();
    return pose;
}

Trajectory trajectory_from_json(const json& j) {
    Trajectory traj;
    traj.intrinsics = intrinsics_from_json(j.at("intrinsics"));
    for (const auto& jf : j.at("frames")) {
        Trajectory::Frame f;
        f.n = jf.at("n").get<int>();
        f.pose = pose_from_json(jf);
        traj.frames.push_back(f);
    }
    traj.validate();
    return traj;
}

NurbsSpec nurbs_from_json(const json& j) {
    NurbsSpec spec;
    for (const auto& p : j.at("control_points"))
        spec.control_points.push_back(Vec3{p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    spec.weights = j.at("weights").get<std::vector<double>>();
    spec.degree = j.at("degree").get<int>();
    spec.knots = j.at("knots").get<std::vector<double>>();
    spec.validate();
    return spec;
}

json load_json_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open json file: " + path.string());
    json j;
    is >> j;
    return j;
}

void save_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open json file for writing: " + path.string());
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
    save_json_file(path, to_json(traj));
}

Trajectory load_trajectory(const std::filesystem::path& path) {
    return trajectory_from_json(load_json_file(path));
}

}  // namespace flowforge
