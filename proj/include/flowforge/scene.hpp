#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flowforge/image.hpp"
#include "flowforge/math.hpp"

namespace flowforge {

struct RigidTransform {
    Mat3 rotation = Mat3::identity();
    Vec3 translation;

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    RigidTransform inverse() const {
        RigidTransform inv;
        inv.rotation = rotation.transposed();
        inv.translation = (inv.rotation * translation) * -1.0;
        return inv;
    }
    void validate(double tol = 1e-9) const;
};

struct Texture {
    enum class Kind { checker, noise };

    Kind kind = Kind::checker;
    double scale = 1.0;  // checker square edge / noise feature size, surface units
    Rgb color_a{0.1, 0.1, 0.1};
    Rgb color_b{0.9, 0.9, 0.9};
    // checker only: 0 = hard squares, 1 = full sinusoidal blend between colors
    double softness = 0.0;
    // checker only: optional second octave at a different scale, mixed
    // equally with the first; makes the pattern aperiodic so block matching
    // has a unique minimum
    double scale2 = 0.0;
    std::uint64_t seed = 0;  // noise only
};

Rgb sample_texture(const Texture& tex, double u, double v);

enum class ShapeKind { plane, sphere };

// Canonical geometry lives in the object's local frame: the plane is z=0
// with texture coords (x, y); the sphere is centered at the origin. The
// per-frame motion maps local to world.
struct SceneObject {
    ShapeKind shape = ShapeKind::plane;
    double radius = 1.0;       // sphere
    double half_extent = 0.0;  // plane: finite |x|,|y| bound; <= 0 means infinite
    Texture texture;
    std::vector<RigidTransform> motion;  // pose per frame; empty = static identity

    const RigidTransform& pose_at(int frame) const;
};

struct SceneSpec {
    std::vector<SceneObject> objects;
    std::optional<SceneObject> background;  // far plane behind everything

    void validate() const;

    // static fronto-parallel plane at world z = depth
    static SceneObject backdrop_plane(double depth, Texture tex);
};

}  // namespace flowforge
