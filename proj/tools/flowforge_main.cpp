// flowforge: synthetic optical-flow dataset tooling, flow<->RGB codec,
// cycle-consistency filtering, two-stage flow-matching generation, and the
// motion/camera metrics, as one batch pipeline.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "flowforge/flo_io.hpp"
#include "flowforge/pipeline.hpp"
#include "flowforge/serialize.hpp"

using namespace flowforge;

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;

    PipelineConfig resolve() const {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg = PipelineConfig::load(config_path);
        if (seed) cfg.seed = *seed;
        if (out) cfg.out = *out;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "pipeline config JSON");
    cmd->add_option("--seed", opts.seed, "root seed override");
    cmd->add_option("--out", opts.out, "output directory override");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic motion data pipeline"};
    app.require_subcommand(1);

    CommonOpts opts;

    // gen
    auto* gen = app.add_subcommand("gen", "synthesize the dataset (frames, flows, manifest)");
    add_common(gen, opts);
    std::optional<std::string> gen_mode;
    std::optional<int> gen_clips;
    gen->add_option("--mode", gen_mode, "'camera' or 'human-like'");
    gen->add_option("--clips", gen_clips, "number of clips");

    // encode
    auto* encode = app.add_subcommand("encode", "compute the scale factor and write encoded PNGs");
    add_common(encode, opts);
    std::optional<double> codec_pct;
    encode->add_option("--codec-percentile", codec_pct, "magnitude percentile for the scale factor");

    // filter
    auto* filter = app.add_subcommand("filter", "score cycle consistency and filter the manifest");
    add_common(filter, opts);
    std::optional<double> filter_pct;
    filter->add_option("--filter-percentile", filter_pct, "keep clips up to this score percentile");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a generation stage");
    add_common(train_cmd, opts);
    std::string train_stage = "motion";
    std::optional<int> train_steps;
    std::optional<double> train_mixture;
    train_cmd->add_option("--stage", train_stage, "'motion' or 'video'")->required();
    train_cmd->add_option("--steps", train_steps, "override fine-tune step count");
    train_cmd->add_option("--mixture-ratio", train_mixture, "synthetic fraction per batch");

    // generate
    auto* generate = app.add_subcommand("generate", "sample the trained models");
    add_common(generate, opts);
    std::string gen_clip;
    bool two_stage = false;
    generate->add_option("--clip", gen_clip,
                         "clip id (condition source; default: first kept clip)");
    generate->add_flag("--two-stage", two_stage,
                       "run motion generation then video generation (default: video stage "
                       "conditioned on the clip's stored flows)");

    // eval
    auto* eval = app.add_subcommand("eval", "metrics");
    add_common(eval, opts);
    std::string eval_clip, frames_dir, flows_a, flows_b, traj_gt, traj_est;
    bool snr_sweep = false;
    eval->add_option("--clip", eval_clip, "clip id for manifest-based evaluation");
    eval->add_option("--frames", frames_dir, "directory of generated frames to score");
    eval->add_option("--flows-a", flows_a, "first .flo directory (direct M-Err)");
    eval->add_option("--flows-b", flows_b, "second .flo directory");
    eval->add_option("--traj-gt", traj_gt, "ground-truth trajectory JSON (mRotErr)");
    eval->add_option("--traj-est", traj_est, "estimated trajectory JSON");
    eval->add_flag("--snr-sweep", snr_sweep, "noise-robustness sweep over 25..5 dB");

    // viz
    auto* viz = app.add_subcommand("viz", "render a flow field as a codec PNG");
    add_common(viz, opts);
    std::string viz_flo, viz_out, viz_legend;
    std::optional<double> viz_scale;
    viz->add_option("--flo", viz_flo, "input .flo file");
    viz->add_option("--out-png", viz_out, "output PNG path");
    viz->add_option("--scale", viz_scale, "scale factor (default: manifest scale_factor_px)");
    viz->add_option("--legend", viz_legend, "also write the hue wheel legend PNG here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) {
            PipelineConfig cfg = opts.resolve();
            if (gen_mode) cfg.mode = *gen_mode;
            if (gen_clips) cfg.clips = *gen_clips;
            if (cfg.mode != "camera" && cfg.mode != "human-like")
                throw std::invalid_argument("gen: mode must be 'camera' or 'human-like'");
            DatasetManifest m = cmd_gen_dataset(cfg);
            std::printf("wrote %zu clips to %s\n", m.entries.size(), cfg.out.string().c_str());
        } else if (encode->parsed()) {
            PipelineConfig cfg = opts.resolve();
            if (codec_pct) cfg.codec_percentile = *codec_pct;
            double sf = cmd_encode(cfg);
            std::printf("scale_factor_px %.6f\n", sf);
        } else if (filter->parsed()) {
            PipelineConfig cfg = opts.resolve();
            if (filter_pct) cfg.filter_percentile = *filter_pct;
            double threshold = cmd_filter(cfg);
            std::printf("threshold_px %.6f\n", threshold);
        } else if (train_cmd->parsed()) {
            PipelineConfig cfg = opts.resolve();
            auto& stage_cfg = train_stage == "video" ? cfg.video : cfg.motion;
            if (train_steps) stage_cfg.finetune_steps = *train_steps;
            if (train_mixture) stage_cfg.mixture_ratio = *train_mixture;
            cmd_train(cfg, train_stage);
            std::printf("trained %s stage\n", train_stage.c_str());
        } else if (generate->parsed()) {
            PipelineConfig cfg = opts.resolve();
            if (two_stage) {
                cmd_generate(cfg, gen_clip);
                std::printf("two-stage generation written to %s\n",
                            (cfg.out / "generated" / "two_stage").string().c_str());
            } else {
                auto dir = cmd_generate_conditioned(cfg, gen_clip);
                std::printf("conditioned generation written to %s\n", dir.string().c_str());
            }
        } else if (eval->parsed()) {
            PipelineConfig cfg = opts.resolve();
            if (snr_sweep) {
                auto rows = cmd_eval_snr(cfg, eval_clip);
                std::printf("%-10s %s\n", "snr_db", "m_err");
                nlohmann::json jr = nlohmann::json::array();
                for (auto [db, err] : rows) {
                    std::printf("%-10.1f %.4f\n", db, err);
                    jr.push_back({{"snr_db", db}, {"m_err", err}});
                }
                save_json_file(cfg.out / "metrics_snr.json", jr);
            } else if (!traj_gt.empty() || !traj_est.empty()) {
                if (traj_gt.empty() || traj_est.empty())
                    throw std::invalid_argument("eval: --traj-gt and --traj-est go together");
                double err = mean_rotation_error(load_trajectory(traj_gt), load_trajectory(traj_est));
                std::printf("mRotErr %.4f rad (%.4f deg)\n", err, err * 180.0 / kPi);
            } else if (!flows_a.empty() || !flows_b.empty()) {
                if (flows_a.empty() || flows_b.empty())
                    throw std::invalid_argument("eval: --flows-a and --flows-b go together");
                auto read_dir = [](const std::string& dir) {
                    std::vector<std::filesystem::path> files;
                    for (const auto& p : std::filesystem::directory_iterator(dir))
                        if (p.path().extension() == ".flo") files.push_back(p.path());
                    std::sort(files.begin(), files.end());
                    std::vector<FlowField> flows;
                    for (const auto& p : files) flows.push_back(read_flow_with_mask(p));
                    return flows;
                };
                double err = motion_error(read_dir(flows_a), read_dir(flows_b));
                std::printf("M-Err %.4f\n", err);
            } else if (!frames_dir.empty()) {
                MetricReport r = cmd_eval_frames(cfg, eval_clip, frames_dir);
                std::printf("M-Err %.4f\n", r.m_err);
                save_json_file(cfg.out / "metrics.json", metric_report_json(r));
            } else {
                throw std::invalid_argument(
                    "eval: pass --frames, --flows-a/--flows-b, --traj-gt/--traj-est, or --snr-sweep");
            }
        } else if (viz->parsed()) {
            PipelineConfig cfg = opts.resolve();
            if (!viz_legend.empty()) write_color_wheel(viz_legend, 128);
            if (!viz_flo.empty()) {
                if (viz_out.empty()) throw std::invalid_argument("viz: --out-png required with --flo");
                double sf;
                if (viz_scale) {
                    sf = *viz_scale;
                } else {
                    DatasetManifest m = DatasetManifest::load(cfg.manifest_path());
                    if (!(m.scale_factor_px > 0))
                        throw std::runtime_error("viz: manifest has no scale factor; pass --scale");
                    sf = m.scale_factor_px;
                }
                cmd_viz(cfg, viz_flo, viz_out, sf);
            } else if (viz_legend.empty()) {
                throw std::invalid_argument("viz: pass --flo and/or --legend");
            }
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
