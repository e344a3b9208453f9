#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace flowforge {

// Dense row-major grid. Indexing is (x, y) with y selecting the row.
template <typename T>
class Image {
  public:
    Image() = default;
    Image(int width, int height, T fill = T{}) : w_(width), h_(height) {
        if (width <= 0 || height <= 0) throw std::invalid_argument("Image: non-positive size");
        px_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    int width() const { return w_; }
    int height() const { return h_; }
    bool empty() const { return px_.empty(); }
    std::size_t size() const { return px_.size(); }
    bool in_bounds(int x, int y) const { return x >= 0 && x < w_ && y >= 0 && y < h_; }

    T& at(int x, int y) { return px_[static_cast<std::size_t>(y) * w_ + x]; }
    const T& at(int x, int y) const { return px_[static_cast<std::size_t>(y) * w_ + x]; }

    T* data() { return px_.data(); }
    const T* data() const { return px_.data(); }

    auto begin() { return px_.begin(); }
    auto end() { return px_.end(); }
    auto begin() const { return px_.begin(); }
    auto end() const { return px_.end(); }

  private:
    int w_ = 0;
    int h_ = 0;
    std::vector<T> px_;
};

struct Rgb {
    double r = 0.0;
    double g = 0.0;
    double b = 0.0;
};

inline double luminance(const Rgb& c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

// Ordered RGB frames, values in [0,1].
struct FrameSequence {
    std::vector<Image<Rgb>> frames;

    int count() const { return static_cast<int>(frames.size()); }
    int width() const { return frames.empty() ? 0 : frames.front().width(); }
    int height() const { return frames.empty() ? 0 : frames.front().height(); }
};

}  // namespace flowforge
