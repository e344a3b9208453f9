#pragma once

#include <cstdint>
#include <vector>

#include "flowforge/camera.hpp"

namespace flowforge {

struct Trajectory {
    struct Frame {
        int n = 0;
        CameraPose pose;
    };

    CameraIntrinsics intrinsics;
    std::vector<Frame> frames;

    void validate() const;
    const CameraPose& pose_at(int n) const;  // throws if frame n is absent
    int count() const { return static_cast<int>(frames.size()); }
};

// Rational B-spline with a clamped knot vector.
struct NurbsSpec {
    std::vector<Vec3> control_points;
    std::vector<double> weights;  // one per control point, all positive
    int degree = 3;
    std::vector<double> knots;  // size = points + degree + 1, non-decreasing

    void validate() const;
    static NurbsSpec clamped_uniform(std::vector<Vec3> points, int degree,
                                     std::vector<double> weights = {});
};

// Fixed camera on the upper hemisphere (world +y up) around `center`,
// oriented at the center. Deterministic in the seed.
CameraPose sample_hemisphere_pose(std::uint64_t rng_seed, double radius, const Vec3& center);

// Curve point at parameter u in [0,1], de Boor recursion on homogeneous
// coordinates.
Vec3 nurbs_eval(const NurbsSpec& spec, double u);

// Interpolating camera path: positions from a clamped uniform-knot spline
// through the keypoints, orientations looking at a per-frame target that is
// linearly interpolated across `look_targets`.
Trajectory nurbs_trajectory(const std::vector<Vec3>& keypoints,
                            const std::vector<Vec3>& look_targets, int n_frames, int degree,
                            const CameraIntrinsics& intr);

}  // namespace flowforge
