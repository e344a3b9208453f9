#include "flowforge/render.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "flowforge/rng.hpp"

namespace flowforge {

void RigidTransform::validate(double tol) const {
    if (!rotation.finite() || !translation.finite())
        throw std::invalid_argument("rigid transform: non-finite values");
    if (rotation.orthonormality_error() > tol || std::abs(rotation.det() - 1.0) > tol)
        throw std::invalid_argument("rigid transform: rotation part is not orthonormal");
}

const RigidTransform& SceneObject::pose_at(int frame) const {
    static const RigidTransform kIdentity{};
    if (motion.empty()) return kIdentity;
    if (frame < 0) return motion.front();
    if (frame >= static_cast<int>(motion.size())) return motion.back();
    return motion[static_cast<std::size_t>(frame)];
}

void SceneSpec::validate() const {
    if (objects.empty()) throw std::invalid_argument("scene: needs at least one object");
    for (const auto& obj : objects)
        for (const auto& m : obj.motion) m.validate();
    if (background)
        for (const auto& m : background->motion) m.validate();
}

SceneObject SceneSpec::backdrop_plane(double depth, Texture tex) {
    SceneObject obj;
    obj.shape = ShapeKind::plane;
    obj.half_extent = 0.0;
    obj.texture = tex;
    RigidTransform pose;
    pose.translation = Vec3{0, 0, depth};
    obj.motion = {pose};
    return obj;
}

static double hash01(std::uint64_t a, std::uint64_t b, std::uint64_t seed) {
    std::uint64_t z = mix_seed(mix_seed(seed, a * 0x9E3779B97F4A7C15ull), b);
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

static double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

Rgb sample_texture(const Texture& tex, double u, double v) {
    auto mix = [&](double t) {
        return Rgb{tex.color_a.r + (tex.color_b.r - tex.color_a.r) * t,
                   tex.color_a.g + (tex.color_b.g - tex.color_a.g) * t,
                   tex.color_a.b + (tex.color_b.b - tex.color_a.b) * t};
    };
    if (tex.kind == Texture::Kind::checker) {
        double s = std::sin(kPi * u / tex.scale) * std::sin(kPi * v / tex.scale);
        if (tex.scale2 > 0.0)
            s = 0.5 * (s + std::sin(kPi * u / tex.scale2) * std::sin(kPi * v / tex.scale2));
        if (tex.softness <= 0.0) return mix(s >= 0.0 ? 1.0 : 0.0);
        double t = 0.5 * (1.0 + std::min(1.0, std::max(-1.0, s / tex.softness)));
        return mix(t);
    }
    // value noise: hashed lattice, smoothstep-bilinear interpolation
    double x = u / tex.scale, y = v / tex.scale;
    double fx = std::floor(x), fy = std::floor(y);
    auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
    double tx = smoothstep(x - fx), ty = smoothstep(y - fy);
    double v00 = hash01(static_cast<std::uint64_t>(ix), static_cast<std::uint64_t>(iy), tex.seed);
    double v10 = hash01(static_cast<std::uint64_t>(ix + 1), static_cast<std::uint64_t>(iy), tex.seed);
    double v01 = hash01(static_cast<std::uint64_t>(ix), static_cast<std::uint64_t>(iy + 1), tex.seed);
    double v11 = hash01(static_cast<std::uint64_t>(ix + 1), static_cast<std::uint64_t>(iy + 1), tex.seed);
    double t = (v00 * (1 - tx) + v10 * tx) * (1 - ty) + (v01 * (1 - tx) + v11 * tx) * ty;
    return mix(t);
}

namespace {

constexpr double kRayEps = 1e-9;

struct Hit {
    double t = std::numeric_limits<double>::infinity();
    bool found = false;
    int object = -1;  // index into objects, or -2 for the background
    Vec3 local;       // hit point in the object's local frame
};

// Ray parameterized so that t equals camera-frame depth when `dir` is the
// camera rotation applied to ((x-cx)/fx, (y-cy)/fy, 1).
bool intersect_object(const SceneObject& obj, int frame, const Vec3& origin, const Vec3& dir,
                      double& t_out, Vec3& local_out) {
    const RigidTransform inv = obj.pose_at(frame).inverse();
    const Vec3 o = inv.apply(origin);
    const Vec3 d = inv.rotation * dir;

    if (obj.shape == ShapeKind::plane) {
        if (std::abs(d.z) < 1e-15) return false;
        double t = -o.z / d.z;
        if (t <= kRayEps) return false;
        Vec3 p = o + d * t;
        if (obj.half_extent > 0.0 &&
            (std::abs(p.x) > obj.half_extent || std::abs(p.y) > obj.half_extent))
            return false;
        t_out = t;
        local_out = p;
        return true;
    }

    // sphere at local origin
    const double a = d.dot(d);
    const double b = 2.0 * o.dot(d);
    const double c = o.dot(o) - obj.radius * obj.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return false;
    const double sq = std::sqrt(disc);
    double t = (-b - sq) / (2.0 * a);
    if (t <= kRayEps) t = (-b + sq) / (2.0 * a);
    if (t <= kRayEps) return false;
    t_out = t;
    local_out = o + d * t;
    return true;
}

Hit raycast(const SceneSpec& scene, int frame, const Vec3& origin, const Vec3& dir) {
    Hit best;
    for (int i = 0; i < static_cast<int>(scene.objects.size()); ++i) {
        double t;
        Vec3 local;
        if (intersect_object(scene.objects[i], frame, origin, dir, t, local) && t < best.t) {
            best = {t, true, i, local};
        }
    }
    if (scene.background) {
        double t;
        Vec3 local;
        if (intersect_object(*scene.background, frame, origin, dir, t, local) && t < best.t) {
            best = {t, true, -2, local};
        }
    }
    return best;
}

const SceneObject& object_ref(const SceneSpec& scene, int index) {
    return index == -2 ? *scene.background : scene.objects[static_cast<std::size_t>(index)];
}

Vec3 pixel_ray_dir(const CameraIntrinsics& intr, const CameraPose& pose, double x, double y) {
    Vec3 dc{(x - intr.cx) / intr.fx, (y - intr.cy) / intr.fy, 1.0};
    return pose.rotation * dc;
}

// surface parameterization used for texturing
void local_uv(const SceneObject& obj, const Vec3& local, double& u, double& v) {
    if (obj.shape == ShapeKind::plane) {
        u = local.x;
        v = local.y;
        return;
    }
    double r = std::max(obj.radius, 1e-12);
    u = std::atan2(local.z, local.x) * r;
    v = std::acos(std::min(1.0, std::max(-1.0, local.y / r))) * r;
}

}  // namespace

DepthMap render_depth(const SceneSpec& scene, const CameraPose& pose,
                      const CameraIntrinsics& intr, int frame) {
    scene.validate();
    intr.validate();
    pose.validate();
    DepthMap out(intr.width, intr.height);
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            Hit hit = raycast(scene, frame, pose.position, pixel_ray_dir(intr, pose, x, y));
            if (hit.found) {
                out.depth.at(x, y) = hit.t;
                out.hit.at(x, y) = 1;
            }
        }
    }
    return out;
}

FlowField render_flow_between(const SceneSpec& scene, const Trajectory& traj, int src_frame,
                              int dst_frame) {
    scene.validate();
    traj.validate();
    const CameraPose& src_pose = traj.pose_at(src_frame);
    const CameraPose& dst_pose = traj.pose_at(dst_frame);
    const CameraIntrinsics& intr = traj.intrinsics;
    const Mat3 dst_w2c = dst_pose.world_to_camera();

    FlowField flow(intr.width, intr.height, false);
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            Hit hit = raycast(scene, src_frame, src_pose.position,
                              pixel_ray_dir(intr, src_pose, x, y));
            if (!hit.found) continue;

            // same local surface point at the destination frame
            const SceneObject& obj = object_ref(scene, hit.object);
            Vec3 moved = obj.pose_at(dst_frame).apply(hit.local);

            Vec3 pc = dst_w2c * (moved - dst_pose.position);
            if (pc.z <= 0.0) continue;
            Vec2 q{intr.fx * pc.x / pc.z + intr.cx, intr.fy * pc.y / pc.z + intr.cy};

            // visibility at the destination: the moved point must be the
            // nearest surface along its own ray
            Vec3 ray = dst_pose.rotation * Vec3{pc.x / pc.z, pc.y / pc.z, 1.0};
            Hit dst_hit = raycast(scene, dst_frame, dst_pose.position, ray);
            if (dst_hit.found && dst_hit.t < pc.z - 1e-6) continue;

            flow.set(x, y, Vec2{q.x - x, q.y - y});
        }
    }
    return flow;
}

FlowField render_flow(const SceneSpec& scene, const Trajectory& traj, int n) {
    return render_flow_between(scene, traj, n, n + 1);
}

FlowField render_flow_backward(const SceneSpec& scene, const Trajectory& traj, int n) {
    return render_flow_between(scene, traj, n + 1, n);
}

Image<Rgb> render_frame(const SceneSpec& scene, const CameraPose& pose,
                        const CameraIntrinsics& intr, int frame) {
    Image<Rgb> img(intr.width, intr.height, Rgb{0, 0, 0});
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            Hit hit = raycast(scene, frame, pose.position, pixel_ray_dir(intr, pose, x, y));
            if (!hit.found) continue;
            const SceneObject& obj = object_ref(scene, hit.object);
            double u, v;
            local_uv(obj, hit.local, u, v);
            Rgb c = sample_texture(obj.texture, u, v);
            img.at(x, y) = Rgb{clamp01(c.r), clamp01(c.g), clamp01(c.b)};
        }
    }
    return img;
}

FrameSequence render_frames(const SceneSpec& scene, const Trajectory& traj) {
    scene.validate();
    traj.validate();
    FrameSequence seq;
    seq.frames.reserve(traj.frames.size());
    for (const auto& f : traj.frames)
        seq.frames.push_back(render_frame(scene, f.pose, traj.intrinsics, f.n));
    return seq;
}

}  // namespace flowforge
