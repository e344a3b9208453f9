#include "flowforge/png_io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace flowforge {

namespace {

const unsigned char kSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

void put_u32_be(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

std::uint32_t get_u32_be(const unsigned char* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
           std::uint32_t(p[3]);
}

void write_chunk(std::ofstream& os, const char type[4], const std::vector<unsigned char>& data) {
    std::vector<unsigned char> head;
    put_u32_be(head, static_cast<std::uint32_t>(data.size()));
    os.write(reinterpret_cast<const char*>(head.data()), 4);
    os.write(type, 4);
    if (!data.empty()) os.write(reinterpret_cast<const char*>(data.data()), data.size());
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(type), 4);
    if (!data.empty()) crc = crc32(crc, data.data(), static_cast<uInt>(data.size()));
    std::vector<unsigned char> tail;
    put_u32_be(tail, static_cast<std::uint32_t>(crc));
    os.write(reinterpret_cast<const char*>(tail.data()), 4);
}

void write_png(const std::filesystem::path& path, int w, int h, int channels,
               const std::vector<unsigned char>& pixels) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("png: cannot open for writing: " + path.string());
    os.write(reinterpret_cast<const char*>(kSignature), 8);

    std::vector<unsigned char> ihdr;
    put_u32_be(ihdr, static_cast<std::uint32_t>(w));
    put_u32_be(ihdr, static_cast<std::uint32_t>(h));
    ihdr.push_back(8);                                   // bit depth
    ihdr.push_back(channels == 1 ? 0 : 2);               // gray or truecolor
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    write_chunk(os, "IHDR", ihdr);

    // filter byte 0 per scanline
    const std::size_t stride = static_cast<std::size_t>(w) * channels;
    std::vector<unsigned char> raw;
    raw.reserve((stride + 1) * h);
    for (int y = 0; y < h; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), pixels.begin() + y * stride, pixels.begin() + (y + 1) * stride);
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> idat(bound);
    if (compress2(idat.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw std::runtime_error("png: deflate failed");
    idat.resize(bound);
    write_chunk(os, "IDAT", idat);
    write_chunk(os, "IEND", {});
    if (!os) throw std::runtime_error("png: write failed: " + path.string());
}

int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

struct Decoded {
    int w = 0, h = 0, channels = 0;
    std::vector<unsigned char> pixels;  // row-major, `channels` bytes per pixel
};

Decoded read_png(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("png: cannot open: " + path.string());
    std::vector<unsigned char> file((std::istreambuf_iterator<char>(is)),
                                    std::istreambuf_iterator<char>());
    if (file.size() < 8 || std::memcmp(file.data(), kSignature, 8) != 0)
        throw std::runtime_error("png: bad signature: " + path.string());

    std::size_t pos = 8;
    Decoded out;
    int bit_depth = 0, color_type = 0;
    std::vector<unsigned char> idat;
    while (pos + 8 <= file.size()) {
        std::uint32_t len = get_u32_be(&file[pos]);
        if (pos + 12 + len > file.size()) throw std::runtime_error("png: truncated chunk");
        const char* type = reinterpret_cast<const char*>(&file[pos + 4]);
        const unsigned char* data = &file[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            out.w = static_cast<int>(get_u32_be(data));
            out.h = static_cast<int>(get_u32_be(data + 4));
            bit_depth = data[8];
            color_type = data[9];
            if (data[12] != 0) throw std::runtime_error("png: interlaced files unsupported");
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (out.w <= 0 || out.h <= 0) throw std::runtime_error("png: missing IHDR");
    if (bit_depth != 8) throw std::runtime_error("png: only 8-bit files supported");
    int channels;
    switch (color_type) {
        case 0: channels = 1; break;
        case 2: channels = 3; break;
        case 6: channels = 4; break;
        default: throw std::runtime_error("png: unsupported color type");
    }

    const std::size_t stride = static_cast<std::size_t>(out.w) * channels;
    std::vector<unsigned char> raw((stride + 1) * out.h);
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        throw std::runtime_error("png: inflate failed: " + path.string());

    out.channels = channels;
    out.pixels.assign(stride * out.h, 0);
    std::vector<unsigned char> prev(stride, 0);
    for (int y = 0; y < out.h; ++y) {
        unsigned char filter = raw[y * (stride + 1)];
        const unsigned char* src = &raw[y * (stride + 1) + 1];
        unsigned char* dst = &out.pixels[y * stride];
        for (std::size_t i = 0; i < stride; ++i) {
            int a = i >= static_cast<std::size_t>(channels) ? dst[i - channels] : 0;
            int b = prev[i];
            int c = i >= static_cast<std::size_t>(channels) ? prev[i - channels] : 0;
            int v;
            switch (filter) {
                case 0: v = src[i]; break;
                case 1: v = src[i] + a; break;
                case 2: v = src[i] + b; break;
                case 3: v = src[i] + (a + b) / 2; break;
                case 4: v = src[i] + paeth(a, b, c); break;
                default: throw std::runtime_error("png: unknown filter type");
            }
            dst[i] = static_cast<unsigned char>(v);
        }
        std::memcpy(prev.data(), dst, stride);
    }
    return out;
}

unsigned char to_byte(double v) {
    double s = std::round(std::min(1.0, std::max(0.0, v)) * 255.0);
    return static_cast<unsigned char>(s);
}

}  // namespace

void write_png_rgb8(const std::filesystem::path& path, const Image<Rgb>& img) {
    std::vector<unsigned char> px;
    px.reserve(img.size() * 3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const Rgb& c = img.at(x, y);
            px.push_back(to_byte(c.r));
            px.push_back(to_byte(c.g));
            px.push_back(to_byte(c.b));
        }
    write_png(path, img.width(), img.height(), 3, px);
}

void write_png_gray8(const std::filesystem::path& path, const Image<std::uint8_t>& img) {
    std::vector<unsigned char> px(img.begin(), img.end());
    write_png(path, img.width(), img.height(), 1, px);
}

Image<Rgb> read_png_rgb8(const std::filesystem::path& path) {
    Decoded d = read_png(path);
    Image<Rgb> img(d.w, d.h);
    for (int y = 0; y < d.h; ++y)
        for (int x = 0; x < d.w; ++x) {
            const unsigned char* p = &d.pixels[(static_cast<std::size_t>(y) * d.w + x) * d.channels];
            if (d.channels == 1)
                img.at(x, y) = Rgb{p[0] / 255.0, p[0] / 255.0, p[0] / 255.0};
            else
                img.at(x, y) = Rgb{p[0] / 255.0, p[1] / 255.0, p[2] / 255.0};
        }
    return img;
}

Image<std::uint8_t> read_png_gray8(const std::filesystem::path& path) {
    Decoded d = read_png(path);
    Image<std::uint8_t> img(d.w, d.h);
    for (int y = 0; y < d.h; ++y)
        for (int x = 0; x < d.w; ++x) {
            const unsigned char* p = &d.pixels[(static_cast<std::size_t>(y) * d.w + x) * d.channels];
            if (d.channels == 1)
                img.at(x, y) = p[0];
            else
                img.at(x, y) = static_cast<std::uint8_t>(
                    std::lround(0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]));
        }
    return img;
}

}  // namespace flowforge
