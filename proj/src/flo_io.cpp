#include "flowforge/flo_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "flowforge/png_io.hpp"

namespace flowforge {

namespace {
constexpr float kTagFloat = 202021.25f;  // "PIEH" when read as little-endian bytes
constexpr int kMaxDim = 999999;
}  // namespace

void write_flo(const std::filesystem::path& path, const FlowField& flow) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("flo: cannot open for writing: " + path.string());
    const std::int32_t w = flow.width(), h = flow.height();
    os.write(reinterpret_cast<const char*>(&kTagFloat), sizeof(kTagFloat));
    os.write(reinterpret_cast<const char*>(&w), sizeof(w));
    os.write(reinterpret_cast<const char*>(&h), sizeof(h));
    std::vector<float> row(static_cast<std::size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec2& v = flow.grid.at(x, y);
            row[2 * x] = static_cast<float>(v.x);
            row[2 * x + 1] = static_cast<float>(v.y);
        }
        os.write(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
    }
    if (!os) throw std::runtime_error("flo: write failed: " + path.string());
}

FlowField read_flo(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("flo: cannot open: " + path.string());
    float tag = 0;
    std::int32_t w = 0, h = 0;
    is.read(reinterpret_cast<char*>(&tag), sizeof(tag));
    is.read(reinterpret_cast<char*>(&w), sizeof(w));
    is.read(reinterpret_cast<char*>(&h), sizeof(h));
    if (!is || tag != kTagFloat)
        throw std::runtime_error("flo: bad magic (big-endian file?): " + path.string());
    if (w <= 0 || w > kMaxDim || h <= 0 || h > kMaxDim)
        throw std::runtime_error("flo: implausible dimensions: " + path.string());
    FlowField flow(w, h, true);
    std::vector<float> row(static_cast<std::size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        is.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
        if (!is) throw std::runtime_error("flo: unexpected end of file: " + path.string());
        for (int x = 0; x < w; ++x) flow.grid.at(x, y) = Vec2{row[2 * x], row[2 * x + 1]};
    }
    return flow;
}

std::filesystem::path mask_path_for(const std::filesystem::path& flo_path) {
    std::filesystem::path p = flo_path;
    p.replace_extension(".mask.png");
    return p;
}

void write_flow_with_mask(const std::filesystem::path& flo_path, const FlowField& flow) {
    write_flo(flo_path, flow);
    Image<std::uint8_t> mask(flow.width(), flow.height());
    for (int y = 0; y < flow.height(); ++y)
        for (int x = 0; x < flow.width(); ++x) mask.at(x, y) = flow.is_valid(x, y) ? 255 : 0;
    write_png_gray8(mask_path_for(flo_path), mask);
}

FlowField read_flow_with_mask(const std::filesystem::path& flo_path) {
    FlowField flow = read_flo(flo_path);
    const auto mask_path = mask_path_for(flo_path);
    if (std::filesystem::exists(mask_path)) {
        Image<std::uint8_t> mask = read_png_gray8(mask_path);
        if (mask.width() != flow.width() || mask.height() != flow.height())
            throw std::runtime_error("flo: sidecar mask size mismatch: " + mask_path.string());
        for (int y = 0; y < flow.height(); ++y)
            for (int x = 0; x < flow.width(); ++x)
                if (mask.at(x, y) < 128) flow.invalidate(x, y);
    }
    return flow;
}

}  // namespace flowforge
