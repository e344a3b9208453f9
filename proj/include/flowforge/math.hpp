#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace flowforge {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec3 normalized() const {
        double n = norm();
        if (n <= 0.0) throw std::invalid_argument("Vec3::normalized: zero vector");
        return {x / n, y / n, z / n};
    }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

// 3x3 matrix, row-major.
struct Mat3 {
    std::array<double, 9> m{};

    static Mat3 identity() {
        Mat3 r;
        r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return r;
    }
    static Mat3 rot_x(double a) {
        double c = std::cos(a), s = std::sin(a);
        Mat3 r;
        r.m = {1, 0, 0, 0, c, -s, 0, s, c};
        return r;
    }
    static Mat3 rot_y(double a) {
        double c = std::cos(a), s = std::sin(a);
        Mat3 r;
        r.m = {c, 0, s, 0, 1, 0, -s, 0, c};
        return r;
    }
    static Mat3 rot_z(double a) {
        double c = std::cos(a), s = std::sin(a);
        Mat3 r;
        r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
        return r;
    }
    static Mat3 from_columns(const Vec3& a, const Vec3& b, const Vec3& c) {
        Mat3 r;
        r.m = {a.x, b.x, c.x, a.y, b.y, c.y, a.z, b.z, c.z};
        return r;
    }

    double at(int row, int col) const { return m[row * 3 + col]; }
    double& at(int row, int col) { return m[row * 3 + col]; }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double s = 0.0;
                for (int k = 0; k < 3; ++k) s += at(i, k) * o.at(k, j);
                r.at(i, j) = s;
            }
        return r;
    }
    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
                m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }
    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.at(i, j) = at(j, i);
        return r;
    }
    double trace() const { return m[0] + m[4] + m[8]; }
    double det() const {
        return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
               m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
    // max |R^T R - I| entry; 0 for an exact rotation
    double orthonormality_error() const {
        Mat3 g = transposed() * (*this);
        double e = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                e = std::max(e, std::abs(g.at(i, j) - (i == j ? 1.0 : 0.0)));
        return e;
    }
    bool is_rotation(double tol) const {
        return orthonormality_error() <= tol && std::abs(det() - 1.0) <= tol;
    }
    bool finite() const {
        for (double v : m)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Nearest-rank percentile: the ceil(p/100 * n)-th order statistic. One
// definition shared by the codec and the dataset filter so small fixtures
// are exact.
inline double percentile_nearest_rank(std::vector<double> values, double pct) {
    if (values.empty()) throw std::invalid_argument("percentile_nearest_rank: empty sample");
    if (!(pct > 0.0 && pct <= 100.0))
        throw std::invalid_argument("percentile_nearest_rank: percentile must be in (0,100]");
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    auto rank = static_cast<std::size_t>(std::ceil(pct * static_cast<double>(n) / 100.0 - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return values[rank - 1];
}

}  // namespace flowforge
