#include "flowforge/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "flowforge/rng.hpp"

namespace flowforge {

void Trajectory::validate() const {
    intrinsics.validate();
    int prev = -1;
    bool first = true;
    for (const auto& f : frames) {
        if (!first && f.n <= prev)
            throw std::invalid_argument("trajectory: frame indices must be strictly increasing");
        f.pose.validate();
        prev = f.n;
        first = false;
    }
}

const CameraPose& Trajectory::pose_at(int n) const {
    for (const auto& f : frames)
        if (f.n == n) return f.pose;
    throw std::invalid_argument("trajectory: frame " + std::to_string(n) + " not present");
}

void NurbsSpec::validate() const {
    if (degree < 1) throw std::invalid_argument("nurbs: degree must be >= 1");
    const std::size_t npts = control_points.size();
    if (npts < static_cast<std::size_t>(degree) + 1)
        throw std::invalid_argument("nurbs: needs at least degree+1 control points");
    if (weights.size() != npts) throw std::invalid_argument("nurbs: one weight per control point");
    for (double w : weights)
        if (!(w > 0.0)) throw std::invalid_argument("nurbs: weights must be positive");
    if (knots.size() != npts + degree + 1)
        throw std::invalid_argument("nurbs: knot vector must have points+degree+1 entries");
    for (std::size_t i = 1; i < knots.size(); ++i)
        if (knots[i] < knots[i - 1]) throw std::invalid_argument("nurbs: knots must be non-decreasing");
    for (int i = 0; i <= degree; ++i) {
        if (knots[i] != knots[0] || knots[knots.size() - 1 - i] != knots.back())
            throw std::invalid_argument("nurbs: knot vector must be clamped");
    }
}

NurbsSpec NurbsSpec::clamped_uniform(std::vector<Vec3> points, int degree,
                                     std::vector<double> weights) {
    NurbsSpec spec;
    spec.degree = degree;
    if (weights.empty()) weights.assign(points.size(), 1.0);
    spec.weights = std::move(weights);
    const int npts = static_cast<int>(points.size());
    spec.control_points = std::move(points);
    spec.knots.assign(npts + degree + 1, 0.0);
    const int segments = npts - degree;
    for (int i = 0; i <= degree; ++i) spec.knots[npts + i] = 1.0;
    for (int j = 1; j < segments; ++j)
        spec.knots[degree + j] = static_cast<double>(j) / segments;
    spec.validate();
    return spec;
}

CameraPose sample_hemisphere_pose(std::uint64_t rng_seed, double radius, const Vec3& center) {
    if (!(radius > 0.0)) throw std::invalid_argument("sample_hemisphere_pose: radius must be positive");
    Rng rng(rng_seed);
    double up_comp = rng.uniform();  // cos(elevation), uniform => area-uniform on the hemisphere
    double azim = rng.uniform() * 2.0 * kPi;
    double s = std::sqrt(std::max(0.0, 1.0 - up_comp * up_comp));
    Vec3 dir{s * std::cos(azim), up_comp, s * std::sin(azim)};
    return CameraPose::look_at(center + dir * radius, center);
}

Vec3 nurbs_eval(const NurbsSpec& spec, double u) {
    spec.validate();
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("nurbs_eval: u outside [0,1]");

    const int p = spec.degree;
    const int npts = static_cast<int>(spec.control_points.size());
    const auto& knots = spec.knots;
    const double lo = knots[p];
    const double hi = knots[npts];
    const double t = lo + u * (hi - lo);

    // knot span: largest k in [p, npts-1] with knots[k] <= t
    int span = npts - 1;
    for (int k = p; k < npts; ++k) {
        if (t < knots[k + 1]) {
            span = k;
            break;
        }
    }

    // de Boor on (w*P, w)
    std::vector<std::array<double, 4>> d(p + 1);
    for (int j = 0; j <= p; ++j) {
        const Vec3& pt = spec.control_points[span - p + j];
        const double w = spec.weights[span - p + j];
        d[j] = {w * pt.x, w * pt.y, w * pt.z, w};
    }
    for (int r = 1; r <= p; ++r) {
        for (int j = p; j >= r; --j) {
            const double denom = knots[j + 1 + span - r] - knots[j + span - p];
            const double alpha = denom > 0.0 ? (t - knots[j + span - p]) / denom : 0.0;
            for (int c = 0; c < 4; ++c) d[j][c] = (1.0 - alpha) * d[j - 1][c] + alpha * d[j][c];
        }
    }
    const auto& h = d[p];
    if (!(h[3] > 0.0)) throw std::runtime_error("nurbs_eval: degenerate homogeneous weight");
    return {h[0] / h[3], h[1] / h[3], h[2] / h[3]};
}

static Vec3 lerp_targets(const std::vector<Vec3>& targets, double u) {
    if (targets.size() == 1) return targets.front();
    double s = u * (targets.size() - 1);
    int i = std::min(static_cast<int>(s), static_cast<int>(targets.size()) - 2);
    double f = s - i;
    return targets[i] * (1.0 - f) + targets[i + 1] * f;
}

Trajectory nurbs_trajectory(const std::vector<Vec3>& keypoints,
                            const std::vector<Vec3>& look_targets, int n_frames, int degree,
                            const CameraIntrinsics& intr) {
    if (n_frames < 2) throw std::invalid_argument("nurbs_trajectory: need at least 2 frames");
    if (look_targets.empty()) throw std::invalid_argument("nurbs_trajectory: need a look target");
    NurbsSpec spec = NurbsSpec::clamped_uniform(keypoints, degree);  // rejects short keypoint lists

    Trajectory traj;
    traj.intrinsics = intr;
    traj.frames.reserve(n_frames);
    for (int i = 0; i < n_frames; ++i) {
        double u = static_cast<double>(i) / (n_frames - 1);
        Vec3 pos = nurbs_eval(spec, u);
        Vec3 target = lerp_targets(look_targets, u);
        traj.frames.push_back({i, CameraPose::look_at(pos, target)});
    }
    return traj;
}

}  // namespace flowforge
