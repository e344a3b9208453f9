#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flowforge/flow.hpp"
#include "flowforge/image.hpp"
#include "flowforge/trajectory.hpp"

namespace flowforge {

// Motion fidelity: mean over frames and co-valid pixels of the squared
// endpoint difference, in px^2.
double motion_error(std::span<const FlowField> input_flow, std::span<const FlowField> estimated_flow);

// Camera controllability: mean geodesic rotation distance over aligned
// frames, radians.
double mean_rotation_error(const Trajectory& gt, const Trajectory& est);

struct NoisySample {
    FlowField flow;
    double target_snr_db = 0.0;
    double measured_snr_db = 0.0;
    std::uint64_t seed = 0;
};

// Additive Gaussian noise on the flow components over valid pixels, scaled
// so the realized noise power hits the target SNR exactly. An infinite
// target passes the flow through untouched. Signal power is the mean square
// over both components jointly.
NoisySample add_noise_snr(const FlowField& flow, double target_db, std::uint64_t seed);

inline constexpr double kSnrSweepDb[] = {25.0, 20.0, 15.0, 10.0, 5.0};

struct BlockMatchConfig {
    int block = 8;
    int search = 7;
};

// Integer block matching under sum-of-absolute-differences with
// parabola-fit subpixel refinement. Blocks with a flat cost surface are
// masked out as low-confidence. Returns one field per consecutive frame
// pair.
std::vector<FlowField> estimate_flow_naive(const FrameSequence& frames,
                                           const BlockMatchConfig& cfg = {});

struct MetricReport {
    double m_err = 0.0;
    double m_rot_err = 0.0;
    std::vector<double> per_frame_m_err;
    std::vector<double> per_frame_rot_err;
};

// per-frame breakdown alongside the pooled value
MetricReport motion_error_report(std::span<const FlowField> input_flow,
                                 std::span<const FlowField> estimated_flow);

}  // namespace flowforge
