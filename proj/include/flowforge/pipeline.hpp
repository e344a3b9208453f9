#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "flowforge/filter.hpp"
#include "flowforge/flowmatch.hpp"
#include "flowforge/manifest.hpp"
#include "flowforge/metrics.hpp"

namespace flowforge {

// Batch pipeline over the shared file formats: synthesize a dataset, encode
// flows to RGB, filter by cycle consistency, train the two stages, generate,
// evaluate, and visualize. All randomness flows from one root seed, split
// per stage by hashing the stage name.

struct StageTrainConfig {
    int hidden = 24;
    int control_hidden = 16;
    int blocks = 2;
    int kernel = 3;
    int coord_frequencies = 2;
    bool predict_clean_sample = true;
    int pretrain_steps = 200;
    int finetune_steps = 200;
    int batch_size = 6;
    double learning_rate = 2e-3;
    double final_lr_fraction = 0.05;
    double mixture_ratio = 0.5;
    std::string time_sampling = "noise-biased";  // or "uniform"

    TimeSampling parsed_time_sampling() const;
};

struct PipelineConfig {
    std::uint64_t seed = 1;
    std::filesystem::path out = "run";
    std::string mode = "camera";  // or "human-like"
    int resolution = 32;
    int frames = 121;  // full-scale default; desk configs override
    int clips = 32;
    double real_fraction = 0.5;

    // scene family
    double focal = 40.0;
    double scene_depth = 5.0;
    double texture_scale = 1.0;
    double texture_scale2 = 2.0;
    double speed_min = 0.10;
    double speed_max = 0.20;
    double hemisphere_radius = 5.0;
    double hemisphere_min_up = 0.95;       // human-like: restrict elevations near the pole
    bool shared_camera = false;            // human-like: one camera pose for every clip
    int trajectory_keypoints = 2;          // camera mode
    int trajectory_degree = 1;

    double codec_percentile = 99.0;
    double filter_percentile = kDefaultFilterPercentile;
    int integrator_steps = 100;
    BlockMatchConfig block_match;

    StageTrainConfig motion;
    StageTrainConfig video;

    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    std::filesystem::path manifest_path() const { return out / "manifest.json"; }
};

// dataset synthesis; returns the manifest it wrote
DatasetManifest cmd_gen_dataset(const PipelineConfig& cfg);

// dataset-level scale factor + encoded PNGs; updates the manifest in place
double cmd_encode(const PipelineConfig& cfg);

// cycle-consistency scoring and percentile filtering; writes report.json
double cmd_filter(const PipelineConfig& cfg);

// stage: "motion" | "video"; writes <stage>.ckpt and <stage>_train_log.jsonl
void cmd_train(const PipelineConfig& cfg, const std::string& stage);

// two-stage generation; camera mode reads the Plücker condition from a clip
// trajectory (clip_id empty = first kept clip)
void cmd_generate(const PipelineConfig& cfg, const std::string& clip_id = "");

// stage-2 only, conditioned on a clip's stored (ground-truth or estimated)
// flows; writes generated frames under out/generated_<clip>/
std::filesystem::path cmd_generate_conditioned(const PipelineConfig& cfg,
                                               const std::string& clip_id);

// M-Err of frames in `frames_dir` against the stored flows of a clip
MetricReport cmd_eval_frames(const PipelineConfig& cfg, const std::string& clip_id,
                             const std::filesystem::path& frames_dir);

nlohmann::json metric_report_json(const MetricReport& report);

// SNR robustness sweep: noisy conditioning -> stage-2 generation -> M-Err,
// one row per target; returns rows of (target_db, m_err)
std::vector<std::pair<double, double>> cmd_eval_snr(const PipelineConfig& cfg,
                                                    const std::string& clip_id);

// flow field -> codec RGB PNG; also writes the hue wheel legend
void cmd_viz(const PipelineConfig& cfg, const std::filesystem::path& flo_path,
             const std::filesystem::path& out_png, double scale_factor_px);
void write_color_wheel(const std::filesystem::path& out_png, int size);

}  // namespace flowforge
