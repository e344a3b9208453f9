#pragma once

#include <array>
#include <optional>

#include "flowforge/image.hpp"
#include "flowforge/math.hpp"

namespace flowforge {

// Coordinate conventions, fixed once for the whole toolkit:
//   - right-handed world, camera looks down its local +z axis
//   - poses store the camera-to-world rotation and the world-space position
//   - rays pass through integer pixel coordinates (no half-pixel offset)

struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    void validate() const;
};

struct CameraPose {
    Mat3 rotation = Mat3::identity();  // camera-to-world
    Vec3 position;

    void validate(double tol = 1e-9) const;
    Mat3 world_to_camera() const { return rotation.transposed(); }

    // Orientation that puts `target` on the optical axis. `up` resolves the
    // roll; near-degenerate up vectors fall back to an alternate axis.
    static CameraPose look_at(const Vec3& position, const Vec3& target,
                              const Vec3& up = Vec3{0, 1, 0});
};

// Per-pixel ray as a Plücker line: (moment, direction) with moment = o x d
// and unit d.
struct PluckerMap {
    Image<std::array<double, 6>> grid;

    int width() const { return grid.width(); }
    int height() const { return grid.height(); }
    Vec3 moment(int x, int y) const {
        const auto& v = grid.at(x, y);
        return {v[0], v[1], v[2]};
    }
    Vec3 direction(int x, int y) const {
        const auto& v = grid.at(x, y);
        return {v[3], v[4], v[5]};
    }
};

// Pinhole projection; nullopt marks a point at or behind the camera plane.
std::optional<Vec2> project(const Vec3& point_world, const CameraIntrinsics& intr,
                            const CameraPose& pose);

Vec3 unproject(const Vec2& pixel, double depth, const CameraIntrinsics& intr,
               const CameraPose& pose);

PluckerMap plucker_embedding(const CameraIntrinsics& intr, const CameraPose& pose);

// Geodesic distance on SO(3), in [0, pi].
double rotation_geodesic(const Mat3& r1, const Mat3& r2);

}  // namespace flowforge
