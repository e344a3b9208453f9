#include "flowforge/flowmatch.hpp"

#include <cmath>

#include "flowforge/math.hpp"
#include <stdexcept>

namespace flowforge {

void FMConfig::validate() const {
    if (integrator_steps < 1) throw std::invalid_argument("FMConfig: integrator steps must be >= 1");
    if (!(mixture_ratio >= 0.0 && mixture_ratio <= 1.0))
        throw std::invalid_argument("FMConfig: mixture_ratio must lie in [0,1]");
    if (batch_size < 1) throw std::invalid_argument("FMConfig: batch size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("FMConfig: learning rate must be positive");
    if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0))
        throw std::invalid_argument("FMConfig: final_lr_fraction must lie in (0,1]");
    if (pretrain_steps < 0 || finetune_steps < 0)
        throw std::invalid_argument("FMConfig: step counts must be non-negative");
}

Tensor fm_interpolate(const Tensor& x0, const Tensor& eps, double t) {
    if (!x0.same_shape(eps)) throw std::invalid_argument("fm_interpolate: shape mismatch");
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("fm_interpolate: t outside [0,1]");
    Tensor out(x0.c, x0.h, x0.w);
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = (1.0 - t) * x0.v[i] + t * eps.v[i];
    return out;
}

Tensor fm_target_velocity(const Tensor& x0, const Tensor& eps) {
    if (!x0.same_shape(eps)) throw std::invalid_argument("fm_target_velocity: shape mismatch");
    Tensor out(x0.c, x0.h, x0.w);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = eps.v[i] - x0.v[i];
    return out;
}

double fm_loss_given(const VelocityNet& model, std::span<const FMDrawnItem> items) {
    if (items.empty()) throw std::invalid_argument("fm_loss: empty batch");
    double total = 0.0;
    for (const auto& item : items) {
        Tensor xt = fm_interpolate(*item.x0, item.eps, item.t);
        Tensor v = fm_target_velocity(*item.x0, item.eps);
        Tensor pred = model.forward(xt, item.cond, item.t);
        double sq = 0.0;
        for (std::size_t i = 0; i < pred.v.size(); ++i) {
            double r = pred.v[i] - v.v[i];
            sq += r * r;
        }
        total += sq / static_cast<double>(pred.v.size());
    }
    return total / static_cast<double>(items.size());
}

double fm_loss_and_grads(const VelocityNet& model, std::span<const FMDrawnItem> items,
                         std::vector<double>& grads) {
    if (items.empty()) throw std::invalid_argument("fm_loss: empty batch");
    double total = 0.0;
    const double n = static_cast<double>(items.size());
    for (const auto& item : items) {
        Tensor xt = fm_interpolate(*item.x0, item.eps, item.t);
        Tensor v = fm_target_velocity(*item.x0, item.eps);
        const double scale = 2.0 / (n * static_cast<double>(v.numel()));
        Tensor pred = model.forward_backward(xt, item.cond, item.t, v, scale, grads);
        double sq = 0.0;
        for (std::size_t i = 0; i < pred.v.size(); ++i) {
            double r = pred.v[i] - v.v[i];
            sq += r * r;
        }
        total += sq / static_cast<double>(pred.v.size());
    }
    return total / n;
}

static FMDrawnItem draw_item(const FMBatchItem& b, Rng& rng,
                             TimeSampling ts = TimeSampling::uniform) {
    FMDrawnItem item;
    item.x0 = b.x0;
    item.cond = b.cond;
    item.t = rng.uniform();
    if (ts == TimeSampling::noise_biased)
        item.t = std::max({item.t, rng.uniform(), rng.uniform()});
    item.eps = randn_tensor(rng, b.x0->c, b.x0->h, b.x0->w);
    return item;
}

double fm_loss(const VelocityNet& model, std::span<const FMBatchItem> batch, Rng& rng) {
    std::vector<FMDrawnItem> items;
    items.reserve(batch.size());
    for (const auto& b : batch) items.push_back(draw_item(b, rng));
    return fm_loss_given(model, items);
}

namespace {

struct Adam {
    double lr, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<double> m, v;
    long step = 0;

    explicit Adam(std::size_t n, double lr_) : lr(lr_), m(n, 0.0), v(n, 0.0) {}

    void update(std::vector<double>& params, const std::vector<double>& g) {
        ++step;
        const double bc1 = 1.0 - std::pow(beta1, step);
        const double bc2 = 1.0 - std::pow(beta2, step);
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            params[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        }
    }
};

int draw_from_pool(const std::vector<int>& pool, Rng& rng) {
    return pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(pool.size()) - 1))];
}

}  // namespace

std::vector<TrainRecord> train(VelocityNet& model, const TrainDataset& data, const FMConfig& cfg,
                               std::uint64_t seed) {
    cfg.validate();
    if (data.samples.empty()) throw std::invalid_argument("train: empty dataset");
    if (model.conditioned() && data.conds.size() != data.samples.size())
        throw std::invalid_argument("train: conditioned model needs one condition per sample");
    if (data.synthetic.size() != data.samples.size())
        throw std::invalid_argument("train: source tags must match sample count");

    std::vector<int> real_pool, syn_pool;
    for (std::size_t i = 0; i < data.samples.size(); ++i)
        (data.synthetic[i] ? syn_pool : real_pool).push_back(static_cast<int>(i));

    const int syn_per_batch = static_cast<int>(std::floor(cfg.mixture_ratio * cfg.batch_size));
    const int real_per_batch = cfg.batch_size - syn_per_batch;
    if (cfg.pretrain_steps > 0 && real_pool.empty())
        throw std::invalid_argument("train: pretrain phase requested but the real pool is empty");
    if (cfg.finetune_steps > 0) {
        if (syn_per_batch > 0 && syn_pool.empty())
            throw std::invalid_argument("train: fine-tune phase needs synthetic samples");
        if (real_per_batch > 0 && real_pool.empty())
            throw std::invalid_argument("train: fine-tune phase needs real samples");
    }

    Rng rng(seed);
    Adam opt(model.params().values.size(), cfg.learning_rate);
    std::vector<double> grads = model.zero_grads();
    std::vector<TrainRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.pretrain_steps + cfg.finetune_steps));

    auto run_step = [&](int step, int n_real, int n_syn) {
        std::vector<FMDrawnItem> items;
        items.reserve(static_cast<std::size_t>(n_real + n_syn));
        auto push = [&](int idx) {
            FMBatchItem b{&data.samples[static_cast<std::size_t>(idx)],
                          model.conditioned() ? &data.conds[static_cast<std::size_t>(idx)] : nullptr};
            items.push_back(draw_item(b, rng, cfg.time_sampling));
        };
        for (int i = 0; i < n_real; ++i) push(draw_from_pool(real_pool, rng));
        for (int i = 0; i < n_syn; ++i) push(draw_from_pool(syn_pool, rng));

        std::fill(grads.begin(), grads.end(), 0.0);
        double loss = fm_loss_and_grads(model, items, grads);
        const int total = cfg.pretrain_steps + cfg.finetune_steps;
        const double progress = total > 1 ? static_cast<double>(step) / (total - 1) : 0.0;
        opt.lr = cfg.learning_rate *
                 (cfg.final_lr_fraction +
                  (1.0 - cfg.final_lr_fraction) * 0.5 * (1.0 + std::cos(kPi * progress)));
        opt.update(model.params().values, grads);
        records.push_back({step, loss, n_real, n_syn});
    };

    int step = 0;
    for (int i = 0; i < cfg.pretrain_steps; ++i) run_step(step++, cfg.batch_size, 0);
    for (int i = 0; i < cfg.finetune_steps; ++i) run_step(step++, real_per_batch, syn_per_batch);
    return records;
}

Tensor fm_sample_with(const VelocityFn& velocity, int c, int h, int w, int steps,
                      std::uint64_t seed) {
    if (steps < 1) throw std::invalid_argument("fm_sample: steps must be >= 1");
    Rng rng(seed);
    Tensor x = randn_tensor(rng, c, h, w);
    const double dt = 1.0 / steps;
    for (int k = 0; k < steps; ++k) {
        const double t = 1.0 - k * dt;
        Tensor u = velocity(x, t);
        if (!u.same_shape(x)) throw std::invalid_argument("fm_sample: velocity shape mismatch");
        for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] -= dt * u.v[i];
    }
    return x;
}

Tensor fm_sample(const VelocityNet& model, const Tensor* cond, const FMConfig& cfg,
                 std::uint64_t seed) {
    const auto& nc = model.config();
    return fm_sample_with(
        [&](const Tensor& x, double t) { return model.forward(x, cond, t); }, nc.sample_channels,
        nc.height, nc.width, cfg.integrator_steps, seed);
}

Tensor encode_flows_tensor(std::span<const FlowField> flows, double scale_factor_px) {
    if (flows.empty()) throw std::invalid_argument("encode_flows_tensor: empty sequence");
    const int h = flows.front().height(), w = flows.front().width();
    Tensor out(static_cast<int>(flows.size()) * 3, h, w);
    for (std::size_t i = 0; i < flows.size(); ++i) {
        EncodedFlow enc = flow_to_rgb(normalize_flow(flows[i], scale_factor_px));
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const Rgb& c = enc.grid.at(x, y);
                out.at(static_cast<int>(i) * 3 + 0, y, x) = c.r;
                out.at(static_cast<int>(i) * 3 + 1, y, x) = c.g;
                out.at(static_cast<int>(i) * 3 + 2, y, x) = c.b;
            }
    }
    return out;
}

std::vector<FlowField> decode_flows_tensor(const Tensor& t, double scale_factor_px) {
    if (t.c % 3 != 0) throw std::invalid_argument("decode_flows_tensor: channels not a multiple of 3");
    std::vector<FlowField> flows;
    for (int i = 0; i < t.c / 3; ++i) {
        EncodedFlow enc;
        enc.grid = Image<Rgb>(t.w, t.h);
        for (int y = 0; y < t.h; ++y)
            for (int x = 0; x < t.w; ++x)
                enc.grid.at(x, y) = Rgb{clamp01(t.at(i * 3 + 0, y, x)), clamp01(t.at(i * 3 + 1, y, x)),
                                        clamp01(t.at(i * 3 + 2, y, x))};
        flows.push_back(rgb_to_flow(enc, scale_factor_px));
    }
    return flows;
}

Tensor plucker_tensor(std::span<const PluckerMap> maps) {
    if (maps.empty()) throw std::invalid_argument("plucker_tensor: empty sequence");
    const int h = maps.front().height(), w = maps.front().width();
    Tensor out(static_cast<int>(maps.size()) * 6, h, w);
    for (std::size_t i = 0; i < maps.size(); ++i)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const auto& v = maps[i].grid.at(x, y);
                for (int c = 0; c < 6; ++c) out.at(static_cast<int>(i) * 6 + c, y, x) = v[c];
            }
    return out;
}

Tensor frames_tensor(const FrameSequence& frames) {
    if (frames.frames.empty()) throw std::invalid_argument("frames_tensor: empty sequence");
    const int h = frames.height(), w = frames.width();
    Tensor out(frames.count(), h, w);
    for (int i = 0; i < frames.count(); ++i)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(i, y, x) = luminance(frames.frames[static_cast<std::size_t>(i)].at(x, y));
    return out;
}

FrameSequence tensor_frames(const Tensor& t) {
    FrameSequence seq;
    for (int i = 0; i < t.c; ++i) {
        Image<Rgb> img(t.w, t.h);
        for (int y = 0; y < t.h; ++y)
            for (int x = 0; x < t.w; ++x) {
                double v = clamp01(t.at(i, y, x));
                img.at(x, y) = Rgb{v, v, v};
            }
        seq.frames.push_back(std::move(img));
    }
    return seq;
}

TwoStageResult two_stage_generate(const VelocityNet& motion_model, const VelocityNet& video_model,
                                  const std::vector<PluckerMap>* plucker, const FMConfig& motion_cfg,
                                  const FMConfig& video_cfg, double scale_factor_px,
                                  std::uint64_t seed) {
    if (motion_model.conditioned() && (plucker == nullptr || plucker->empty()))
        throw std::invalid_argument("two_stage_generate: camera mode requires Plücker maps");
    if (!motion_model.conditioned() && plucker != nullptr)
        throw std::invalid_argument("two_stage_generate: object mode takes no Plücker maps");

    Tensor cond;
    const Tensor* cond_ptr = nullptr;
    if (motion_model.conditioned()) {
        cond = plucker_tensor(*plucker);
        if (cond.c != motion_model.config().cond_channels)
            throw std::invalid_argument("two_stage_generate: Plücker channel count mismatch");
        cond_ptr = &cond;
    }

    TwoStageResult result;
    Tensor enc = fm_sample(motion_model, cond_ptr, motion_cfg, stage_seed(seed, "motion-sample"));
    for (auto& v : enc.v) v = clamp01(v);  // decoding guard
    result.encoded_flows = enc;
    result.flows = decode_flows_tensor(enc, scale_factor_px);

    if (video_model.config().cond_channels != enc.c)
        throw std::invalid_argument("two_stage_generate: stage shapes are incompatible");
    Tensor frames = fm_sample(video_model, &enc, video_cfg, stage_seed(seed, "video-sample"));
    result.frames = tensor_frames(frames);
    return result;
}

}  // namespace flowforge
