#include "flowforge/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "flowforge/rng.hpp"

namespace flowforge {

double motion_error(std::span<const FlowField> input_flow,
                    std::span<const FlowField> estimated_flow) {
    if (input_flow.size() != estimated_flow.size() || input_flow.empty())
        throw std::invalid_argument("motion_error: sequence length mismatch");
    double sum = 0.0;
    long count = 0;
    for (std::size_t i = 0; i < input_flow.size(); ++i) {
        const FlowField& a = input_flow[i];
        const FlowField& b = estimated_flow[i];
        if (a.width() != b.width() || a.height() != b.height())
            throw std::invalid_argument("motion_error: field shape mismatch");
        for (int y = 0; y < a.height(); ++y)
            for (int x = 0; x < a.width(); ++x) {
                if (!a.is_valid(x, y) || !b.is_valid(x, y)) continue;
                Vec2 d = a.grid.at(x, y) - b.grid.at(x, y);
                sum += d.dot(d);
                ++count;
            }
    }
    if (count == 0) throw std::domain_error("motion_error: no co-valid pixels");
    return sum / count;
}

MetricReport motion_error_report(std::span<const FlowField> input_flow,
                                 std::span<const FlowField> estimated_flow) {
    MetricReport report;
    report.m_err = motion_error(input_flow, estimated_flow);
    for (std::size_t i = 0; i < input_flow.size(); ++i) {
        std::span<const FlowField> a(&input_flow[i], 1), b(&estimated_flow[i], 1);
        report.per_frame_m_err.push_back(motion_error(a, b));
    }
    return report;
}

double mean_rotation_error(const Trajectory& gt, const Trajectory& est) {
    if (gt.frames.size() != est.frames.size() || gt.frames.empty())
        throw std::invalid_argument("mean_rotation_error: frame count mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < gt.frames.size(); ++i) {
        if (gt.frames[i].n != est.frames[i].n)
            throw std::invalid_argument("mean_rotation_error: frame indices not aligned");
        sum += rotation_geodesic(gt.frames[i].pose.rotation, est.frames[i].pose.rotation);
    }
    return sum / static_cast<double>(gt.frames.size());
}

NoisySample add_noise_snr(const FlowField& flow, double target_db, std::uint64_t seed) {
    NoisySample out;
    out.flow = flow;
    out.target_snr_db = target_db;
    out.seed = seed;

    double signal_power = 0.0;
    long count = 0;
    for (int y = 0; y < flow.height(); ++y)
        for (int x = 0; x < flow.width(); ++x) {
            if (!flow.is_valid(x, y)) continue;
            const Vec2& v = flow.grid.at(x, y);
            signal_power += v.x * v.x + v.y * v.y;
            count += 2;
        }
    if (count == 0 || !(signal_power > 0.0))
        throw std::domain_error("add_noise_snr: flow has zero power");
    signal_power /= count;

    if (std::isinf(target_db)) {
        out.measured_snr_db = std::numeric_limits<double>::infinity();
        return out;
    }

    const double noise_power = signal_power / std::pow(10.0, target_db / 10.0);
    Rng rng(seed);
    std::vector<Vec2> draws(static_cast<std::size_t>(count / 2));
    double draw_power = 0.0;
    for (auto& d : draws) {
        d = Vec2{rng.normal(), rng.normal()};
        draw_power += d.x * d.x + d.y * d.y;
    }
    draw_power /= count;
    // match the realized noise power to the target exactly
    const double gain = std::sqrt(noise_power / draw_power);

    std::size_t i = 0;
    double realized = 0.0;
    for (int y = 0; y < flow.height(); ++y)
        for (int x = 0; x < flow.width(); ++x) {
            if (!flow.is_valid(x, y)) continue;
            Vec2 n = draws[i++] * gain;
            realized += n.x * n.x + n.y * n.y;
            out.flow.grid.at(x, y) += n;
        }
    realized /= count;
    out.measured_snr_db = 10.0 * std::log10(signal_power / realized);
    return out;
}

namespace {

// Matching runs on binomially prefiltered luminance. The filter is
// shift-invariant, so exact integer-shift recovery is unaffected, while
// frame-independent pixel noise is attenuated before the SAD search.
Image<double> to_luma_filtered(const Image<Rgb>& img) {
    const int w = img.width(), h = img.height();
    Image<double> luma(w, h), out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) luma.at(x, y) = luminance(img.at(x, y));
    static const double k[3] = {0.25, 0.5, 0.25};
    Image<double> tmp(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int i = -1; i <= 1; ++i)
                s += k[i + 1] * luma.at(std::clamp(x + i, 0, w - 1), y);
            tmp.at(x, y) = s;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double s = 0;
            for (int i = -1; i <= 1; ++i)
                s += k[i + 1] * tmp.at(x, std::clamp(y + i, 0, h - 1));
            out.at(x, y) = s;
        }
    return out;
}

// target coordinates are border-replicated so the full search window is
// usable at frame edges
double block_sad(const Image<double>& a, const Image<double>& b, int ax, int ay, int bx, int by,
                 int size) {
    double sad = 0.0;
    for (int y = 0; y < size; ++y) {
        const int ty = std::clamp(by + y, 0, b.height() - 1);
        for (int x = 0; x < size; ++x) {
            const int tx = std::clamp(bx + x, 0, b.width() - 1);
            sad += std::abs(a.at(ax + x, ay + y) - b.at(tx, ty));
        }
    }
    return sad;
}

// vertex of the parabola through (-1,cm) (0,c0) (+1,cp), clamped to [-1/2, 1/2]
double parabola_offset(double cm, double c0, double cp) {
    const double denom = cm - 2.0 * c0 + cp;
    if (denom <= 0.0) return 0.0;
    return std::min(0.5, std::max(-0.5, 0.5 * (cm - cp) / denom));
}

}  // namespace

std::vector<FlowField> estimate_flow_naive(const FrameSequence& frames,
                                           const BlockMatchConfig& cfg) {
    if (frames.count() < 2) throw std::invalid_argument("estimate_flow_naive: need at least 2 frames");
    if (cfg.block < 1 || cfg.search < 1)
        throw std::invalid_argument("estimate_flow_naive: block and search radii must be positive");
    const int w = frames.width(), h = frames.height();
    if (w < cfg.block || h < cfg.block)
        throw std::invalid_argument("estimate_flow_naive: frame smaller than block");

    std::vector<Image<double>> luma;
    luma.reserve(frames.frames.size());
    for (const auto& f : frames.frames) luma.push_back(to_luma_filtered(f));

    const int nbx = w / cfg.block, nby = h / cfg.block;
    const int span = 2 * cfg.search + 1;
    std::vector<double> cost(static_cast<std::size_t>(span) * span);

    std::vector<FlowField> out;
    for (int fi = 0; fi + 1 < frames.count(); ++fi) {
        const Image<double>& a = luma[static_cast<std::size_t>(fi)];
        const Image<double>& b = luma[static_cast<std::size_t>(fi) + 1];
        FlowField flow(w, h, false);

        for (int byi = 0; byi < nby; ++byi) {
            for (int bxi = 0; bxi < nbx; ++bxi) {
                const int ax = bxi * cfg.block, ay = byi * cfg.block;
                double best = std::numeric_limits<double>::infinity();
                double worst = -best;
                int best_dx = 0, best_dy = 0;
                for (int dy = -cfg.search; dy <= cfg.search; ++dy) {
                    for (int dx = -cfg.search; dx <= cfg.search; ++dx) {
                        double c = block_sad(a, b, ax, ay, ax + dx, ay + dy, cfg.block);
                        cost[static_cast<std::size_t>(dy + cfg.search) * span + (dx + cfg.search)] = c;
                        if (c < best) {
                            best = c;
                            best_dx = dx;
                            best_dy = dy;
                        }
                        if (c > worst) worst = c;
                    }
                }
                auto cost_at = [&](int dx, int dy) {
                    return cost[static_cast<std::size_t>(dy + cfg.search) * span +
                                (dx + cfg.search)];
                };
                // Low confidence: a textureless cost surface, or an argmin
                // pinned at the search-range boundary without a perfect match
                // (the true minimum may lie outside the window).
                const bool flat = !(worst - best > 1e-9);
                const bool perfect = best <= 1e-9;
                const bool pinned =
                    std::abs(best_dx) == cfg.search || std::abs(best_dy) == cfg.search;
                const bool low_confidence = flat || (!perfect && pinned);
                Vec2 v{static_cast<double>(best_dx), static_cast<double>(best_dy)};
                // a perfect integer match needs no subpixel refinement
                if (!flat && !perfect && !pinned) {
                    v.x += parabola_offset(cost_at(best_dx - 1, best_dy), best,
                                           cost_at(best_dx + 1, best_dy));
                    v.y += parabola_offset(cost_at(best_dx, best_dy - 1), best,
                                           cost_at(best_dx, best_dy + 1));
                }

                // fill the block, extending over any right/bottom margin
                const int x_end = (bxi == nbx - 1) ? w : ax + cfg.block;
                const int y_end = (byi == nby - 1) ? h : ay + cfg.block;
                for (int y = ay; y < y_end; ++y)
                    for (int x = ax; x < x_end; ++x) {
                        if (low_confidence)
                            flow.invalidate(x, y);
                        else
                            flow.set(x, y, v);
                    }
            }
        }
        out.push_back(std::move(flow));
    }
    return out;
}

}  // namespace flowforge
