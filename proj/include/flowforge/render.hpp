#pragma once

#include "flowforge/camera.hpp"
#include "flowforge/flow.hpp"
#include "flowforge/scene.hpp"
#include "flowforge/trajectory.hpp"

namespace flowforge {

// Depth is the camera-frame z coordinate of the nearest hit, so that
// unproject(pixel, depth) reconstructs the surface point exactly.
struct DepthMap {
    Image<double> depth;
    Image<std::uint8_t> hit;

    DepthMap() = default;
    DepthMap(int w, int h) : depth(w, h), hit(w, h, 0) {}
    int width() const { return depth.width(); }
    int height() const { return depth.height(); }
};

DepthMap render_depth(const SceneSpec& scene, const CameraPose& pose,
                      const CameraIntrinsics& intr, int frame);

// Exact flow from frame n to n+1: unproject each visible surface point,
// advance it with its object's rigid motion, reproject at the target pose.
// Pixels with no hit, a behind-camera target, or a target-frame occlusion
// are masked out.
FlowField render_flow(const SceneSpec& scene, const Trajectory& traj, int n);

// Same construction with source frame n+1 and target frame n.
FlowField render_flow_backward(const SceneSpec& scene, const Trajectory& traj, int n);

// General form used by the two above.
FlowField render_flow_between(const SceneSpec& scene, const Trajectory& traj, int src_frame,
                              int dst_frame);

// Ray-cast shading of the procedural textures; background pixels are black.
FrameSequence render_frames(const SceneSpec& scene, const Trajectory& traj);

Image<Rgb> render_frame(const SceneSpec& scene, const CameraPose& pose,
                        const CameraIntrinsics& intr, int frame);

}  // namespace flowforge
