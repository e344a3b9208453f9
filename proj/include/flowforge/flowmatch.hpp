#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "flowforge/camera.hpp"
#include "flowforge/codec.hpp"
#include "flowforge/net.hpp"
#include "flowforge/rng.hpp"

namespace flowforge {

// Flow-matching on the linear path x_t = (1-t) x0 + t eps with target
// velocity eps - x0, trained by velocity regression and sampled by Euler
// integration from t=1 down to t=0.

// Training-time distribution of the path parameter t. `uniform` is the
// plain objective; `noise_biased` draws t = max(u1, u2) (density 2t), which
// concentrates training where the sample is mostly noise and the model must
// work from the condition alone. Desk-scale models converge far faster with
// the biased draw; the objective itself is unchanged.
enum class TimeSampling { uniform, noise_biased };

struct FMConfig {
    NetConfig net;
    int integrator_steps = 100;
    double learning_rate = 2e-3;
    int batch_size = 8;
    double mixture_ratio = 0.5;  // synthetic fraction per fine-tune batch
    int pretrain_steps = 0;      // real-only phase
    int finetune_steps = 0;      // mixed-batch phase
    TimeSampling time_sampling = TimeSampling::uniform;
    // cosine decay of the learning rate down to this fraction by the last step
    double final_lr_fraction = 1.0;

    void validate() const;
};

Tensor fm_interpolate(const Tensor& x0, const Tensor& eps, double t);
Tensor fm_target_velocity(const Tensor& x0, const Tensor& eps);

// One training example with its noise draw pinned, so losses are exactly
// reproducible (finite-difference checks rely on this).
struct FMDrawnItem {
    const Tensor* x0 = nullptr;
    const Tensor* cond = nullptr;  // null for unconditioned models
    Tensor eps;
    double t = 0.0;
};

double fm_loss_given(const VelocityNet& model, std::span<const FMDrawnItem> items);
double fm_loss_and_grads(const VelocityNet& model, std::span<const FMDrawnItem> items,
                         std::vector<double>& grads);

struct FMBatchItem {
    const Tensor* x0 = nullptr;
    const Tensor* cond = nullptr;
};

// Draws t ~ U[0,1) and eps ~ N(0,I) per sample, then scores the batch.
double fm_loss(const VelocityNet& model, std::span<const FMBatchItem> batch, Rng& rng);

struct TrainRecord {
    int step = 0;
    double loss = 0.0;
    int real_count = 0;
    int synthetic_count = 0;
};

struct TrainDataset {
    std::vector<Tensor> samples;
    std::vector<Tensor> conds;  // empty when the model is unconditioned
    std::vector<std::uint8_t> synthetic;

    std::size_t size() const { return samples.size(); }
};

// Two-phase gradient-descent loop (Adam): pretrain on real samples, then
// fine-tune with floor(mixture_ratio * batch) synthetic draws per batch and
// the rest real. Deterministic in the seed.
std::vector<TrainRecord> train(VelocityNet& model, const TrainDataset& data, const FMConfig& cfg,
                               std::uint64_t seed);

using VelocityFn = std::function<Tensor(const Tensor& x, double t)>;

// Euler integration of dx/dt = velocity(x, t) from t=1 (a fresh normal draw)
// to t=0 in `steps` uniform steps.
Tensor fm_sample_with(const VelocityFn& velocity, int c, int h, int w, int steps,
                      std::uint64_t seed);
Tensor fm_sample(const VelocityNet& model, const Tensor* cond, const FMConfig& cfg,
                 std::uint64_t seed);

// --- tensor <-> domain bridges -------------------------------------------

// (3*(N-1)) x H x W stack of HSV-encoded flows
Tensor encode_flows_tensor(std::span<const FlowField> flows, double scale_factor_px);
std::vector<FlowField> decode_flows_tensor(const Tensor& t, double scale_factor_px);

Tensor plucker_tensor(std::span<const PluckerMap> maps);  // 6N x H x W
Tensor frames_tensor(const FrameSequence& frames);        // luminance, N x H x W
FrameSequence tensor_frames(const Tensor& t);             // values clamped to [0,1]

struct TwoStageResult {
    std::vector<FlowField> flows;
    FrameSequence frames;
    Tensor encoded_flows;  // stage-1 output after the [0,1] decoding guard
};

// Stage 1 samples encoded flow (Plücker-conditioned in camera mode,
// unconditioned in object mode); stage 2 samples frames conditioned on that
// flow through the control branch.
TwoStageResult two_stage_generate(const VelocityNet& motion_model, const VelocityNet& video_model,
                                  const std::vector<PluckerMap>* plucker, const FMConfig& motion_cfg,
                                  const FMConfig& video_cfg, double scale_factor_px,
                                  std::uint64_t seed);

}  // namespace flowforge
