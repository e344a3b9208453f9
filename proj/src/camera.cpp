#include "flowforge/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace flowforge {

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("intrinsics: image size must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height))
        throw std::invalid_argument("intrinsics: principal point outside image");
    if (!std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) || !std::isfinite(cy))
        throw std::invalid_argument("intrinsics: non-finite values");
}

void CameraPose::validate(double tol) const {
    if (!rotation.finite() || !position.finite())
        throw std::invalid_argument("pose: non-finite values");
    if (rotation.orthonormality_error() > tol || std::abs(rotation.det() - 1.0) > tol)
        throw std::invalid_argument("pose: rotation is not orthonormal with det +1");
}

CameraPose CameraPose::look_at(const Vec3& position, const Vec3& target, const Vec3& up) {
    Vec3 fwd = target - position;
    if (fwd.norm() < 1e-12) throw std::invalid_argument("look_at: target coincides with position");
    fwd = fwd.normalized();
    Vec3 upv = up.normalized();
    if (std::abs(fwd.dot(upv)) > 1.0 - 1e-9) {
        // forward parallel to up; pick whichever world axis is least aligned
        upv = std::abs(fwd.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    }
    Vec3 x_cam = upv.cross(fwd).normalized();
    Vec3 y_cam = fwd.cross(x_cam);
    CameraPose pose;
    pose.rotation = Mat3::from_columns(x_cam, y_cam, fwd);
    pose.position = position;
    return pose;
}

std::optional<Vec2> project(const Vec3& point_world, const CameraIntrinsics& intr,
                            const CameraPose& pose) {
    if (!point_world.finite()) throw std::invalid_argument("project: non-finite point");
    intr.validate();
    pose.validate();
    Vec3 pc = pose.world_to_camera() * (point_world - pose.position);
    if (pc.z <= 0.0) return std::nullopt;
    return Vec2{intr.fx * pc.x / pc.z + intr.cx, intr.fy * pc.y / pc.z + intr.cy};
}

Vec3 unproject(const Vec2& pixel, double depth, const CameraIntrinsics& intr,
               const CameraPose& pose) {
    if (!pixel.finite() || !std::isfinite(depth)) throw std::invalid_argument("unproject: non-finite input");
    if (!(depth > 0.0)) throw std::invalid_argument("unproject: depth must be positive");
    intr.validate();
    pose.validate();
    Vec3 pc{(pixel.x - intr.cx) / intr.fx * depth, (pixel.y - intr.cy) / intr.fy * depth, depth};
    return pose.rotation * pc + pose.position;
}

PluckerMap plucker_embedding(const CameraIntrinsics& intr, const CameraPose& pose) {
    intr.validate();
    pose.validate();
    PluckerMap map;
    map.grid = Image<std::array<double, 6>>(intr.width, intr.height);
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            Vec3 dc{(x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0};
            Vec3 d = (pose.rotation * dc).normalized();
            Vec3 moment = pose.position.cross(d);
            map.grid.at(x, y) = {moment.x, moment.y, moment.z, d.x, d.y, d.z};
        }
    }
    return map;
}

double rotation_geodesic(const Mat3& r1, const Mat3& r2) {
    const double tol = 1e-6;
    if (r1.orthonormality_error() > tol || r2.orthonormality_error() > tol)
        throw std::invalid_argument("rotation_geodesic: input is not orthonormal");
    // arccos((trace-1)/2) evaluated through atan2: the skew part supplies
    // sin(angle), which keeps small angles well-conditioned
    Mat3 rel = r1.transposed() * r2;
    double c = (rel.trace() - 1.0) / 2.0;
    Vec3 skew{rel.at(2, 1) - rel.at(1, 2), rel.at(0, 2) - rel.at(2, 0),
              rel.at(1, 0) - rel.at(0, 1)};
    return std::atan2(0.5 * skew.norm(), c);
}

}  // namespace flowforge
