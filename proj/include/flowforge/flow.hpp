#pragma once

#include <cstdint>
#include <optional>

#include "flowforge/image.hpp"
#include "flowforge/math.hpp"

namespace flowforge {

// Per-pixel displacement from frame n to frame n+1, in pixels. The mask marks
// pixels with a visible surface at the source frame; masked-out pixels store
// a zero displacement.
struct FlowField {
    Image<Vec2> grid;
    Image<std::uint8_t> valid;

    FlowField() = default;
    FlowField(int width, int height, bool all_valid = true)
        : grid(width, height), valid(width, height, all_valid ? 1 : 0) {}

    int width() const { return grid.width(); }
    int height() const { return grid.height(); }

    bool is_valid(int x, int y) const { return valid.at(x, y) != 0; }
    void set(int x, int y, const Vec2& v) {
        grid.at(x, y) = v;
        valid.at(x, y) = 1;
    }
    void invalidate(int x, int y) {
        grid.at(x, y) = Vec2{};
        valid.at(x, y) = 0;
    }

    std::size_t valid_count() const {
        std::size_t n = 0;
        for (auto m : valid) n += (m != 0);
        return n;
    }
};

// Bilinear lookup with border clamping. Positions outside [0,W-1]x[0,H-1]
// and lookups touching any invalid pixel return nullopt.
inline std::optional<Vec2> sample_bilinear(const FlowField& f, const Vec2& pos) {
    const int w = f.width(), h = f.height();
    if (!(pos.x >= 0.0 && pos.x <= w - 1.0 && pos.y >= 0.0 && pos.y <= h - 1.0))
        return std::nullopt;
    int x0 = static_cast<int>(std::floor(pos.x));
    int y0 = static_cast<int>(std::floor(pos.y));
    int x1 = std::min(x0 + 1, w - 1);
    int y1 = std::min(y0 + 1, h - 1);
    double fx = pos.x - x0;
    double fy = pos.y - y0;
    if (!f.is_valid(x0, y0) || !f.is_valid(x1, y0) || !f.is_valid(x0, y1) || !f.is_valid(x1, y1))
        return std::nullopt;
    const Vec2& a = f.grid.at(x0, y0);
    const Vec2& b = f.grid.at(x1, y0);
    const Vec2& c = f.grid.at(x0, y1);
    const Vec2& d = f.grid.at(x1, y1);
    double w00 = (1.0 - fx) * (1.0 - fy);
    double w10 = fx * (1.0 - fy);
    double w01 = (1.0 - fx) * fy;
    double w11 = fx * fy;
    return Vec2{a.x * w00 + b.x * w10 + c.x * w01 + d.x * w11,
                a.y * w00 + b.y * w10 + c.y * w01 + d.y * w11};
}

}  // namespace flowforge
