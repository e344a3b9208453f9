#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace flowforge {

class Rng;

// C x H x W grid of doubles, channel-major.
struct Tensor {
    int c = 0, h = 0, w = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int c_, int h_, int w_)
        : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}

    double& at(int ch, int y, int x) {
        return v[(static_cast<std::size_t>(ch) * h + y) * w + x];
    }
    double at(int ch, int y, int x) const {
        return v[(static_cast<std::size_t>(ch) * h + y) * w + x];
    }
    std::size_t numel() const { return v.size(); }
    bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
    double* channel(int ch) { return v.data() + static_cast<std::size_t>(ch) * h * w; }
    const double* channel(int ch) const { return v.data() + static_cast<std::size_t>(ch) * h * w; }
};

Tensor randn_tensor(Rng& rng, int c, int h, int w);

// Named views into one flat parameter buffer; keeps the optimizer, the
// checkpoint format, and finite-difference checks trivial.
struct ParamStore {
    struct Entry {
        std::string name;
        std::vector<int> shape;
        std::size_t offset = 0;
        std::size_t count = 0;
    };

    std::vector<double> values;
    std::vector<Entry> entries;

    std::size_t add(const std::string& name, std::vector<int> shape);
};

// Same-padding 2D convolution over Tensor channels, parameters held in a
// ParamStore.
struct Conv {
    int in_c = 0, out_c = 0, k = 1;
    std::size_t w_off = 0, b_off = 0;

    void init(ParamStore& store, const std::string& name, int in, int out, int ksize);
    void forward(const double* params, const Tensor& x, Tensor& y) const;
    // Accumulates parameter gradients into `grads` and, when gx != nullptr,
    // accumulates input gradients into *gx (caller zeroes it first).
    void backward(const double* params, const Tensor& x, const Tensor& gy, Tensor* gx,
                  double* grads) const;
    std::size_t weight_count() const {
        return static_cast<std::size_t>(in_c) * out_c * k * k;
    }
};

struct NetConfig {
    int sample_channels = 0;
    int cond_channels = 0;  // 0 = unconditioned model
    int height = 0, width = 0;
    int hidden = 24;          // 0 collapses the net to the single output conv
    int control_hidden = 12;
    int blocks = 2;  // hidden convolutions after the input conv
    int kernel = 3;
    // Fixed sinusoidal coordinate features appended to the input; 8 channels
    // per frequency (per-axis sin/cos plus their products).
    int coord_frequencies = 3;
    // When set, the conv stack predicts the clean sample and the velocity is
    // formed analytically as (x - prediction) / max(t, t_floor). The model's
    // output is the velocity either way. Small models train far better this
    // way: the stack regresses the sample instead of reproducing its noisy
    // input.
    bool predict_clean_sample = false;
    double t_floor = 0.05;

    int coord_channels() const { return 8 * coord_frequencies; }
    bool operator==(const NetConfig&) const = default;
};

// Velocity-prediction network: a small stack of local linear layers with
// tanh nonlinearities, a fixed sinusoidal time embedding added channel-wise
// after the input conv, and an optional control branch that mirrors the
// trunk at reduced width and injects context maps into the trunk by
// pixel-wise addition after each block.
class VelocityNet {
  public:
    VelocityNet(const NetConfig& cfg, std::uint64_t init_seed);

    const NetConfig& config() const { return cfg_; }
    bool conditioned() const { return cfg_.cond_channels > 0; }

    // Test hook: with the control pathway disabled the conditioned forward
    // pass takes exactly the unconditioned code path.
    void set_control_enabled(bool enabled) { control_enabled_ = enabled; }
    bool control_enabled() const { return control_enabled_; }

    // cond may be null only for an unconditioned model.
    Tensor forward(const Tensor& x, const Tensor* cond, double t) const;

    // Forward pass plus gradient of 0.5*scale*|out - target|^2 summed over
    // elements, accumulated into grads(). Returns the prediction.
    Tensor forward_backward(const Tensor& x, const Tensor* cond, double t, const Tensor& target,
                            double scale, std::vector<double>& grads) const;

    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }
    std::vector<double> zero_grads() const { return std::vector<double>(store_.values.size(), 0.0); }

  private:
    struct Trace;
    Tensor run(const Tensor& x, const Tensor* cond, double t, Trace* trace) const;
    void time_embedding(double t, std::vector<double>& out) const;

    NetConfig cfg_;
    ParamStore store_;
    Conv trunk_in_, trunk_out_;
    std::vector<Conv> trunk_mid_;
    Conv control_in_;
    std::vector<Conv> control_mid_;
    std::vector<Conv> inject_;
    Tensor coords_;
    bool control_enabled_ = true;
};

void save_checkpoint(const std::filesystem::path& path, const VelocityNet& net);
VelocityNet load_checkpoint(const std::filesystem::path& path);

}  // namespace flowforge
