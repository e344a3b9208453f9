#include "flowforge/net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "flowforge/math.hpp"
#include "flowforge/rng.hpp"

namespace flowforge {

Tensor randn_tensor(Rng& rng, int c, int h, int w) {
    Tensor t(c, h, w);
    for (auto& v : t.v) v = rng.normal();
    return t;
}

std::size_t ParamStore::add(const std::string& name, std::vector<int> shape) {
    std::size_t count = 1;
    for (int d : shape) count *= static_cast<std::size_t>(d);
    Entry e{name, std::move(shape), values.size(), count};
    values.resize(values.size() + count, 0.0);
    entries.push_back(std::move(e));
    return entries.back().offset;
}

void Conv::init(ParamStore& store, const std::string& name, int in, int out, int ksize) {
    in_c = in;
    out_c = out;
    k = ksize;
    w_off = store.add(name + ".weight", {out, in, ksize, ksize});
    b_off = store.add(name + ".bias", {out});
}

void Conv::forward(const double* P, const Tensor& x, Tensor& y) const {
    const int H = x.h, W = x.w, pad = k / 2;
    const double* wp = P + w_off;
    const double* bp = P + b_off;
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (int oc = 0; oc < out_c; ++oc) {
        double* yp = y.v.data() + oc * plane;
        const double bias = bp[oc];
        for (std::size_t i = 0; i < plane; ++i) yp[i] = bias;
    }
    for (int oc = 0; oc < out_c; ++oc) {
        double* yp = y.v.data() + oc * plane;
        for (int ic = 0; ic < in_c; ++ic) {
            const double* xp = x.v.data() + ic * plane;
            const double* wk = wp + (static_cast<std::size_t>(oc) * in_c + ic) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                const int dy = ky - pad;
                for (int kx = 0; kx < k; ++kx) {
                    const int dx = kx - pad;
                    const double wv = wk[ky * k + kx];
                    const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                    const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                    for (int yy = y0; yy < y1; ++yy) {
                        const double* xr = xp + static_cast<std::size_t>(yy + dy) * W + dx;
                        double* yr = yp + static_cast<std::size_t>(yy) * W;
                        for (int xx = x0; xx < x1; ++xx) yr[xx] += wv * xr[xx];
                    }
                }
            }
        }
    }
}

void Conv::backward(const double* P, const Tensor& x, const Tensor& gy, Tensor* gx,
                    double* G) const {
    const int H = x.h, W = x.w, pad = k / 2;
    const double* wp = P + w_off;
    double* gw = G + w_off;
    double* gb = G + b_off;
    const std::size_t plane = static_cast<std::size_t>(H) * W;

    for (int oc = 0; oc < out_c; ++oc) {
        const double* gyp = gy.v.data() + oc * plane;
        double s = 0.0;
        for (std::size_t i = 0; i < plane; ++i) s += gyp[i];
        gb[oc] += s;
    }
    for (int oc = 0; oc < out_c; ++oc) {
        const double* gyp = gy.v.data() + oc * plane;
        for (int ic = 0; ic < in_c; ++ic) {
            const double* xp = x.v.data() + ic * plane;
            double* gxp = gx ? gx->v.data() + ic * plane : nullptr;
            const double* wk = wp + (static_cast<std::size_t>(oc) * in_c + ic) * k * k;
            double* gwk = gw + (static_cast<std::size_t>(oc) * in_c + ic) * k * k;
            for (int ky = 0; ky < k; ++ky) {
                const int dy = ky - pad;
                for (int kx = 0; kx < k; ++kx) {
                    const int dx = kx - pad;
                    const int y0 = std::max(0, -dy), y1 = std::min(H, H - dy);
                    const int x0 = std::max(0, -dx), x1 = std::min(W, W - dx);
                    double acc = 0.0;
                    const double wv = wk[ky * k + kx];
                    for (int yy = y0; yy < y1; ++yy) {
                        const double* xr = xp + static_cast<std::size_t>(yy + dy) * W + dx;
                        const double* gyr = gyp + static_cast<std::size_t>(yy) * W;
                        if (gxp) {
                            double* gxr = gxp + static_cast<std::size_t>(yy + dy) * W + dx;
                            for (int xx = x0; xx < x1; ++xx) {
                                acc += gyr[xx] * xr[xx];
                                gxr[xx] += wv * gyr[xx];
                            }
                        } else {
                            for (int xx = x0; xx < x1; ++xx) acc += gyr[xx] * xr[xx];
                        }
                    }
                    gwk[ky * k + kx] += acc;
                }
            }
        }
    }
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// SiLU x*sigmoid(x); its quadratic term lets the net form products of the
// coordinate features with condition-derived gains quickly
Tensor silu(const Tensor& z) {
    Tensor a(z.c, z.h, z.w);
    for (std::size_t i = 0; i < z.v.size(); ++i) a.v[i] = z.v[i] * sigmoid(z.v[i]);
    return a;
}

// d(silu)/dz from the cached pre-activation
void silu_backward(const Tensor& pre, const Tensor& ga, Tensor& gz) {
    for (std::size_t i = 0; i < pre.v.size(); ++i) {
        const double s = sigmoid(pre.v[i]);
        gz.v[i] = ga.v[i] * s * (1.0 + pre.v[i] * (1.0 - s));
    }
}

Tensor make_coords(const NetConfig& cfg) {
    const int n = cfg.coord_channels();
    if (n == 0) return Tensor{};
    Tensor out(n, cfg.height, cfg.width);
    for (int f = 0; f < cfg.coord_frequencies; ++f) {
        const double wx = 2.0 * kPi * std::pow(2.0, f) / cfg.width;
        const double wy = 2.0 * kPi * std::pow(2.0, f) / cfg.height;
        for (int y = 0; y < cfg.height; ++y) {
            for (int x = 0; x < cfg.width; ++x) {
                const double sx = std::sin(wx * x), cx = std::cos(wx * x);
                const double sy = std::sin(wy * y), cy = std::cos(wy * y);
                const int base = 8 * f;
                out.at(base + 0, y, x) = sx;
                out.at(base + 1, y, x) = cx;
                out.at(base + 2, y, x) = sy;
                out.at(base + 3, y, x) = cy;
                out.at(base + 4, y, x) = sx * sy;
                out.at(base + 5, y, x) = sx * cy;
                out.at(base + 6, y, x) = cx * sy;
                out.at(base + 7, y, x) = cx * cy;
            }
        }
    }
    return out;
}

void init_conv_weights(ParamStore& store, const Conv& conv, Rng& rng, bool zero) {
    double* w = store.values.data() + conv.w_off;
    if (zero) {
        std::memset(w, 0, conv.weight_count() * sizeof(double));
    } else {
        const double scale = std::sqrt(1.0 / (conv.in_c * conv.k * conv.k));
        for (std::size_t i = 0; i < conv.weight_count(); ++i) w[i] = rng.normal() * scale;
    }
    // biases start at zero (already zeroed by ParamStore::add)
}

}  // namespace

struct VelocityNet::Trace {
    Tensor input;                  // sample ++ coordinate features
    std::vector<Tensor> pre;       // per stage, pre-activation (time embedding added)
    std::vector<Tensor> act;       // per stage, post-activation and post-injection
    std::vector<Tensor> ctrl_pre;  // control branch pre-activations
    std::vector<Tensor> ctrl_act;  // control branch activations
};

VelocityNet::VelocityNet(const NetConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
    if (cfg.sample_channels <= 0 || cfg.height <= 0 || cfg.width <= 0)
        throw std::invalid_argument("VelocityNet: sample shape must be positive");
    if (cfg.hidden < 0 || cfg.blocks < 0 || cfg.kernel < 1 || cfg.kernel % 2 == 0)
        throw std::invalid_argument("VelocityNet: bad architecture parameters");
    if (cfg.hidden == 0 && cfg.cond_channels > 0)
        throw std::invalid_argument("VelocityNet: micro model cannot take conditioning");

    coords_ = make_coords(cfg);
    const int in_total = cfg.sample_channels + cfg.coord_channels();

    Rng rng(init_seed);
    if (cfg_.hidden == 0) {
        trunk_out_.init(store_, "out", in_total, cfg.sample_channels, cfg.kernel);
        init_conv_weights(store_, trunk_out_, rng, false);
        return;
    }

    trunk_in_.init(store_, "trunk_in", in_total, cfg.hidden, cfg.kernel);
    trunk_mid_.resize(cfg.blocks);
    for (int b = 0; b < cfg.blocks; ++b)
        trunk_mid_[b].init(store_, "trunk_mid" + std::to_string(b), cfg.hidden, cfg.hidden,
                           cfg.kernel);
    trunk_out_.init(store_, "trunk_out", cfg.hidden, cfg.sample_channels, cfg.kernel);

    if (conditioned()) {
        control_in_.init(store_, "control_in", cfg.cond_channels, cfg.control_hidden, cfg.kernel);
        control_mid_.resize(cfg.blocks);
        for (int b = 0; b < cfg.blocks; ++b)
            control_mid_[b].init(store_, "control_mid" + std::to_string(b), cfg.control_hidden,
                                 cfg.control_hidden, cfg.kernel);
        inject_.resize(cfg.blocks + 1);
        for (int s = 0; s <= cfg.blocks; ++s)
            inject_[s].init(store_, "inject" + std::to_string(s), cfg.control_hidden, cfg.hidden, 1);
    }

    init_conv_weights(store_, trunk_in_, rng, false);
    for (auto& c : trunk_mid_) init_conv_weights(store_, c, rng, false);
    init_conv_weights(store_, trunk_out_, rng, false);
    if (conditioned()) {
        init_conv_weights(store_, control_in_, rng, false);
        for (auto& c : control_mid_) init_conv_weights(store_, c, rng, false);
        // zero-init injections: a fresh conditioned model starts out exactly
        // equal to its unconditioned trunk
        for (auto& c : inject_) init_conv_weights(store_, c, rng, true);
    }
}

void VelocityNet::time_embedding(double t, std::vector<double>& out) const {
    out.resize(cfg_.hidden);
    for (int c = 0; c < cfg_.hidden; ++c) {
        const double freq = kPi * std::pow(2.0, c / 2);
        out[c] = (c % 2 == 0) ? std::sin(freq * t) : std::cos(freq * t);
    }
}

Tensor VelocityNet::run(const Tensor& x, const Tensor* cond, double t, Trace* trace) const {
    if (x.c != cfg_.sample_channels || x.h != cfg_.height || x.w != cfg_.width)
        throw std::invalid_argument("VelocityNet: sample shape mismatch");
    const bool use_cond = conditioned() && control_enabled_;
    if (conditioned()) {
        if (!cond) throw std::invalid_argument("VelocityNet: conditioned model requires a condition");
        if (cond->c != cfg_.cond_channels || cond->h != cfg_.height || cond->w != cfg_.width)
            throw std::invalid_argument("VelocityNet: condition shape mismatch");
    } else if (cond) {
        throw std::invalid_argument("VelocityNet: unconditioned model given a condition");
    }
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("VelocityNet: t outside [0,1]");

    const double* P = store_.values.data();
    const std::size_t plane = static_cast<std::size_t>(cfg_.height) * cfg_.width;

    // assemble input
    Tensor input(cfg_.sample_channels + cfg_.coord_channels(), cfg_.height, cfg_.width);
    std::memcpy(input.v.data(), x.v.data(), x.v.size() * sizeof(double));
    if (coords_.c > 0)
        std::memcpy(input.v.data() + x.v.size(), coords_.v.data(), coords_.v.size() * sizeof(double));

    if (cfg_.hidden == 0) {
        Tensor out(cfg_.sample_channels, cfg_.height, cfg_.width);
        trunk_out_.forward(P, input, out);
        if (trace) trace->input = std::move(input);
        return out;
    }

    std::vector<double> temb;
    time_embedding(t, temb);

    const int stages = cfg_.blocks + 1;
    std::vector<Tensor> pre(stages), act(stages), ctrl_pre(stages), ctrl(stages);

    Tensor z(cfg_.hidden, cfg_.height, cfg_.width);
    trunk_in_.forward(P, input, z);
    for (int c = 0; c < cfg_.hidden; ++c) {
        double* zp = z.channel(c);
        for (std::size_t i = 0; i < plane; ++i) zp[i] += temb[c];
    }
    Tensor a = silu(z);
    pre[0] = std::move(z);

    if (use_cond) {
        Tensor cz(cfg_.control_hidden, cfg_.height, cfg_.width);
        control_in_.forward(P, *cond, cz);
        ctrl[0] = silu(cz);
        ctrl_pre[0] = std::move(cz);
        Tensor inj(cfg_.hidden, cfg_.height, cfg_.width);
        inject_[0].forward(P, ctrl[0], inj);
        for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += inj.v[i];
    }
    act[0] = std::move(a);

    for (int b = 0; b < cfg_.blocks; ++b) {
        Tensor zb(cfg_.hidden, cfg_.height, cfg_.width);
        trunk_mid_[b].forward(P, act[b], zb);
        Tensor ab = silu(zb);
        pre[b + 1] = std::move(zb);
        if (use_cond) {
            Tensor cz(cfg_.control_hidden, cfg_.height, cfg_.width);
            control_mid_[b].forward(P, ctrl[b], cz);
            ctrl[b + 1] = silu(cz);
            ctrl_pre[b + 1] = std::move(cz);
            Tensor inj(cfg_.hidden, cfg_.height, cfg_.width);
            inject_[b + 1].forward(P, ctrl[b + 1], inj);
            for (std::size_t i = 0; i < ab.v.size(); ++i) ab.v[i] += inj.v[i];
        }
        act[b + 1] = std::move(ab);
    }

    Tensor out(cfg_.sample_channels, cfg_.height, cfg_.width);
    trunk_out_.forward(P, act[cfg_.blocks], out);

    if (trace) {
        trace->input = std::move(input);
        trace->pre = std::move(pre);
        trace->act = std::move(act);
        trace->ctrl_pre = std::move(ctrl_pre);
        trace->ctrl_act = std::move(ctrl);
    }
    return out;
}

Tensor VelocityNet::forward(const Tensor& x, const Tensor* cond, double t) const {
    Tensor out = run(x, cond, t, nullptr);
    if (cfg_.predict_clean_sample) {
        const double inv = 1.0 / std::max(t, cfg_.t_floor);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = (x.v[i] - out.v[i]) * inv;
    }
    return out;
}

Tensor VelocityNet::forward_backward(const Tensor& x, const Tensor* cond, double t,
                                     const Tensor& target, double scale,
                                     std::vector<double>& grads) const {
    if (grads.size() != store_.values.size())
        throw std::invalid_argument("forward_backward: gradient buffer size mismatch");
    Trace trace;
    Tensor raw = run(x, cond, t, &trace);
    if (!raw.same_shape(target))
        throw std::invalid_argument("forward_backward: target shape mismatch");

    // model output (velocity) and the gradient of the squared error with
    // respect to the raw conv-stack output
    Tensor out = raw;
    double raw_gain = 1.0;
    if (cfg_.predict_clean_sample) {
        const double inv = 1.0 / std::max(t, cfg_.t_floor);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = (x.v[i] - raw.v[i]) * inv;
        raw_gain = -inv;
    }
    Tensor gout(out.c, out.h, out.w);
    for (std::size_t i = 0; i < out.v.size(); ++i)
        gout.v[i] = scale * raw_gain * (out.v[i] - target.v[i]);

    const double* P = store_.values.data();
    double* G = grads.data();
    const bool use_cond = conditioned() && control_enabled_;

    if (cfg_.hidden == 0) {
        trunk_out_.backward(P, trace.input, gout, nullptr, G);
        return out;
    }

    const int stages = cfg_.blocks + 1;
    Tensor ga(cfg_.hidden, cfg_.height, cfg_.width);
    trunk_out_.backward(P, trace.act[cfg_.blocks], gout, &ga, G);

    std::vector<Tensor> gctrl;
    if (use_cond) {
        gctrl.assign(stages, Tensor(cfg_.control_hidden, cfg_.height, cfg_.width));
    }

    Tensor gz(cfg_.hidden, cfg_.height, cfg_.width);
    for (int s = cfg_.blocks; s >= 0; --s) {
        if (use_cond) inject_[s].backward(P, trace.ctrl_act[s], ga, &gctrl[s], G);
        silu_backward(trace.pre[s], ga, gz);
        if (s == 0) {
            // the time embedding is an additive constant: no parameters
            trunk_in_.backward(P, trace.input, gz, nullptr, G);
        } else {
            std::fill(ga.v.begin(), ga.v.end(), 0.0);
            trunk_mid_[s - 1].backward(P, trace.act[s - 1], gz, &ga, G);
        }
    }

    if (use_cond) {
        Tensor gcz(cfg_.control_hidden, cfg_.height, cfg_.width);
        for (int s = cfg_.blocks; s >= 1; --s) {
            silu_backward(trace.ctrl_pre[s], gctrl[s], gcz);
            control_mid_[s - 1].backward(P, trace.ctrl_act[s - 1], gcz, &gctrl[s - 1], G);
        }
        silu_backward(trace.ctrl_pre[0], gctrl[0], gcz);
        control_in_.backward(P, *cond, gcz, nullptr, G);
    }
    return out;
}

void save_checkpoint(const std::filesystem::path& path, const VelocityNet& net) {
    const auto& cfg = net.config();
    nlohmann::json header;
    header["format"] = "flowforge-checkpoint";
    header["version"] = 1;
    header["net"] = {{"sample_channels", cfg.sample_channels},
                     {"cond_channels", cfg.cond_channels},
                     {"height", cfg.height},
                     {"width", cfg.width},
                     {"hidden", cfg.hidden},
                     {"control_hidden", cfg.control_hidden},
                     {"blocks", cfg.blocks},
                     {"kernel", cfg.kernel},
                     {"coord_frequencies", cfg.coord_frequencies},
                     {"predict_clean_sample", cfg.predict_clean_sample},
                     {"t_floor", cfg.t_floor}};
    nlohmann::json params = nlohmann::json::array();
    for (const auto& e : net.params().entries)
        params.push_back({{"name", e.name}, {"shape", e.shape}, {"offset", e.offset}});
    header["params"] = params;

    const std::string htext = header.dump();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path.string());
    std::uint64_t hsize = htext.size();
    os.write(reinterpret_cast<const char*>(&hsize), sizeof(hsize));
    os.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    os.write(reinterpret_cast<const char*>(net.params().values.data()),
             static_cast<std::streamsize>(net.params().values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path.string());
}

VelocityNet load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path.string());
    std::uint64_t hsize = 0;
    is.read(reinterpret_cast<char*>(&hsize), sizeof(hsize));
    if (!is || hsize == 0 || hsize > (1u << 20))
        throw std::runtime_error("checkpoint: bad header size: " + path.string());
    std::string htext(hsize, '\0');
    is.read(htext.data(), static_cast<std::streamsize>(hsize));
    nlohmann::json header = nlohmann::json::parse(htext);
    if (header.value("format", "") != "flowforge-checkpoint")
        throw std::runtime_error("checkpoint: unrecognized format: " + path.string());

    const auto& jn = header.at("net");
    NetConfig cfg;
    cfg.sample_channels = jn.at("sample_channels").get<int>();
    cfg.cond_channels = jn.at("cond_channels").get<int>();
    cfg.height = jn.at("height").get<int>();
    cfg.width = jn.at("width").get<int>();
    cfg.hidden = jn.at("hidden").get<int>();
    cfg.control_hidden = jn.at("control_hidden").get<int>();
    cfg.blocks = jn.at("blocks").get<int>();
    cfg.kernel = jn.at("kernel").get<int>();
    cfg.coord_frequencies = jn.at("coord_frequencies").get<int>();
    cfg.predict_clean_sample = jn.value("predict_clean_sample", false);
    cfg.t_floor = jn.value("t_floor", 0.05);

    VelocityNet net(cfg, 0);
    auto& values = net.params().values;
    is.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated parameter block: " + path.string());
    return net;
}

}  // namespace flowforge
