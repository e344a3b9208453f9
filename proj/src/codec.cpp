#include "flowforge/codec.hpp"

#include <cmath>
#include <stdexcept>

namespace flowforge {

double compute_scale_factor(std::span<const FlowField> flows, double percentile) {
    std::vector<double> mags;
    for (const auto& f : flows) {
        for (int y = 0; y < f.height(); ++y)
            for (int x = 0; x < f.width(); ++x)
                if (f.is_valid(x, y)) mags.push_back(f.grid.at(x, y).norm());
    }
    if (mags.empty()) throw std::invalid_argument("compute_scale_factor: no valid pixels");
    double sf = percentile_nearest_rank(std::move(mags), percentile);
    if (!(sf > 0.0))
        throw std::domain_error("compute_scale_factor: degenerate scale (percentile magnitude is zero)");
    return sf;
}

FlowField normalize_flow(const FlowField& f, double scale_factor_px) {
    if (!(scale_factor_px > 0.0))
        throw std::invalid_argument("normalize_flow: scale factor must be positive");
    FlowField out(f.width(), f.height(), false);
    for (int y = 0; y < f.height(); ++y) {
        for (int x = 0; x < f.width(); ++x) {
            if (!f.is_valid(x, y)) continue;
            const Vec2& v = f.grid.at(x, y);
            double mag = v.norm();
            if (mag == 0.0) {
                out.set(x, y, Vec2{0, 0});
                continue;
            }
            double scaled = std::min(1.0, std::sqrt(mag / scale_factor_px));
            out.set(x, y, v * (scaled / mag));
        }
    }
    return out;
}

Rgb hsv_to_rgb(double hue_deg, double sat, double val) {
    double c = val * sat;
    double hp = hue_deg / 60.0;
    double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1)      { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else             { r = c; b = x; }
    double m = val - c;
    return {r + m, g + m, b + m};
}

void rgb_to_hsv(const Rgb& c, double& hue_deg, double& sat, double& val) {
    double mx = std::max(c.r, std::max(c.g, c.b));
    double mn = std::min(c.r, std::min(c.g, c.b));
    double delta = mx - mn;
    val = mx;
    sat = mx > 0.0 ? delta / mx : 0.0;
    if (delta <= 0.0) {
        hue_deg = 0.0;
        return;
    }
    double h;
    if (mx == c.r)      h = std::fmod((c.g - c.b) / delta, 6.0);
    else if (mx == c.g) h = (c.b - c.r) / delta + 2.0;
    else                h = (c.r - c.g) / delta + 4.0;
    h *= 60.0;
    if (h < 0.0) h += 360.0;
    hue_deg = h;
}

EncodedFlow flow_to_rgb(const FlowField& f_normalized) {
    EncodedFlow out;
    out.grid = Image<Rgb>(f_normalized.width(), f_normalized.height(), Rgb{0, 0, 0});
    for (int y = 0; y < f_normalized.height(); ++y) {
        for (int x = 0; x < f_normalized.width(); ++x) {
            if (!f_normalized.is_valid(x, y)) continue;  // black
            const Vec2& v = f_normalized.grid.at(x, y);
            double m = v.norm();
            if (m > 1.0 + 1e-9)
                throw std::invalid_argument("flow_to_rgb: magnitude above 1; normalize first");
            m = std::min(m, 1.0);
            if (m == 0.0) continue;
            double alpha = std::atan2(v.y, v.x);  // (-pi, pi], zero convention for m=0
            double hue = alpha * 180.0 / kPi;
            if (hue < 0.0) hue += 360.0;
            out.grid.at(x, y) = hsv_to_rgb(hue, 1.0, m);
        }
    }
    return out;
}

FlowField rgb_to_flow(const EncodedFlow& e, double scale_factor_px) {
    if (!(scale_factor_px > 0.0))
        throw std::invalid_argument("rgb_to_flow: scale factor must be positive");
    FlowField out(e.width(), e.height(), true);
    for (int y = 0; y < e.height(); ++y) {
        for (int x = 0; x < e.width(); ++x) {
            double hue, sat, val;
            rgb_to_hsv(e.grid.at(x, y), hue, sat, val);
            if (val <= 0.0) continue;  // zero flow
            double mag = val * val * scale_factor_px;
            double alpha = (hue > 180.0 ? hue - 360.0 : hue) * kPi / 180.0;
            out.grid.at(x, y) = Vec2{mag * std::cos(alpha), mag * std::sin(alpha)};
        }
    }
    return out;
}

}  // namespace flowforge
