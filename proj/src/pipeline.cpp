#include "flowforge/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "flowforge/filter.hpp"
#include "flowforge/flo_io.hpp"
#include "flowforge/png_io.hpp"
#include "flowforge/render.hpp"
#include "flowforge/serialize.hpp"

namespace flowforge {

using nlohmann::json;

TimeSampling StageTrainConfig::parsed_time_sampling() const {
    if (time_sampling == "uniform") return TimeSampling::uniform;
    if (time_sampling == "noise-biased") return TimeSampling::noise_biased;
    throw std::invalid_argument("config: unknown time_sampling '" + time_sampling + "'");
}

namespace {

StageTrainConfig stage_from_json(const json& j, StageTrainConfig base) {
    base.hidden = j.value("hidden", base.hidden);
    base.control_hidden = j.value("control_hidden", base.control_hidden);
    base.blocks = j.value("blocks", base.blocks);
    base.kernel = j.value("kernel", base.kernel);
    base.coord_frequencies = j.value("coord_frequencies", base.coord_frequencies);
    base.predict_clean_sample = j.value("predict_clean_sample", base.predict_clean_sample);
    base.pretrain_steps = j.value("pretrain_steps", base.pretrain_steps);
    base.finetune_steps = j.value("finetune_steps", base.finetune_steps);
    base.batch_size = j.value("batch_size", base.batch_size);
    base.learning_rate = j.value("learning_rate", base.learning_rate);
    base.final_lr_fraction = j.value("final_lr_fraction", base.final_lr_fraction);
    base.mixture_ratio = j.value("mixture_ratio", base.mixture_ratio);
    base.time_sampling = j.value("time_sampling", base.time_sampling);
    return base;
}

json stage_to_json(const StageTrainConfig& s) {
    return json{{"hidden", s.hidden},
                {"control_hidden", s.control_hidden},
                {"blocks", s.blocks},
                {"kernel", s.kernel},
                {"coord_frequencies", s.coord_frequencies},
                {"predict_clean_sample", s.predict_clean_sample},
                {"pretrain_steps", s.pretrain_steps},
                {"finetune_steps", s.finetune_steps},
                {"batch_size", s.batch_size},
                {"learning_rate", s.learning_rate},
                {"final_lr_fraction", s.final_lr_fraction},
                {"mixture_ratio", s.mixture_ratio},
                {"time_sampling", s.time_sampling}};
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    c.seed = j.value("seed", c.seed);
    c.out = std::filesystem::path(j.value("out", c.out.string()));
    c.mode = j.value("mode", c.mode);
    if (c.mode != "camera" && c.mode != "human-like")
        throw std::invalid_argument("config: mode must be 'camera' or 'human-like'");
    c.resolution = j.value("resolution", c.resolution);
    c.frames = j.value("frames", c.frames);
    c.clips = j.value("clips", c.clips);
    c.real_fraction = j.value("real_fraction", c.real_fraction);
    c.focal = j.value("focal", c.focal);
    c.scene_depth = j.value("scene_depth", c.scene_depth);
    c.texture_scale = j.value("texture_scale", c.texture_scale);
    c.texture_scale2 = j.value("texture_scale2", c.texture_scale2);
    c.speed_min = j.value("speed_min", c.speed_min);
    c.speed_max = j.value("speed_max", c.speed_max);
    c.hemisphere_radius = j.value("hemisphere_radius", c.hemisphere_radius);
    c.hemisphere_min_up = j.value("hemisphere_min_up", c.hemisphere_min_up);
    c.shared_camera = j.value("shared_camera", c.shared_camera);
    c.trajectory_keypoints = j.value("trajectory_keypoints", c.trajectory_keypoints);
    c.trajectory_degree = j.value("trajectory_degree", c.trajectory_degree);
    c.codec_percentile = j.value("codec_percentile", c.codec_percentile);
    c.filter_percentile = j.value("filter_percentile", c.filter_percentile);
    c.integrator_steps = j.value("integrator_steps", c.integrator_steps);
    c.block_match.block = j.value("block_size", c.block_match.block);
    c.block_match.search = j.value("search_radius", c.block_match.search);
    if (j.contains("motion")) c.motion = stage_from_json(j.at("motion"), c.motion);
    if (j.contains("video")) c.video = stage_from_json(j.at("video"), c.video);
    if (c.resolution <= 0 || c.frames < 2 || c.clips < 1)
        throw std::invalid_argument("config: resolution/frames/clips out of range");
    if (!(c.codec_percentile > 0 && c.codec_percentile <= 100) ||
        !(c.filter_percentile > 0 && c.filter_percentile <= 100))
        throw std::invalid_argument("config: percentiles must lie in (0,100]");
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    return from_json(load_json_file(path));
}

json PipelineConfig::to_json() const {
    return json{{"seed", seed},
                {"out", out.string()},
                {"mode", mode},
                {"resolution", resolution},
                {"frames", frames},
                {"clips", clips},
                {"real_fraction", real_fraction},
                {"focal", focal},
                {"scene_depth", scene_depth},
                {"texture_scale", texture_scale},
                {"texture_scale2", texture_scale2},
                {"speed_min", speed_min},
                {"speed_max", speed_max},
                {"hemisphere_radius", hemisphere_radius},
                {"hemisphere_min_up", hemisphere_min_up},
                {"shared_camera", shared_camera},
                {"trajectory_keypoints", trajectory_keypoints},
                {"trajectory_degree", trajectory_degree},
                {"codec_percentile", codec_percentile},
                {"filter_percentile", filter_percentile},
                {"integrator_steps", integrator_steps},
                {"block_size", block_match.block},
                {"search_radius", block_match.search},
                {"motion", stage_to_json(motion)},
                {"video", stage_to_json(video)}};
}

namespace {

struct ClipRender {
    std::string id;
    bool synthetic = false;
    Trajectory traj;
    FrameSequence frames;
    std::vector<FlowField> fwd;  // stored flows (estimated for real clips)
    std::vector<FlowField> bwd;
    double speed = 0.0;
    double angle = 0.0;
};

CameraIntrinsics make_intrinsics(const PipelineConfig& cfg) {
    return CameraIntrinsics{cfg.focal, cfg.focal, cfg.resolution / 2.0, cfg.resolution / 2.0,
                            cfg.resolution, cfg.resolution};
}

Texture backdrop_texture(const PipelineConfig& cfg) {
    Texture tex;
    tex.kind = Texture::Kind::checker;
    tex.scale = cfg.texture_scale;
    tex.scale2 = cfg.texture_scale2;
    tex.softness = 1.0;
    tex.color_a = Rgb{0.02, 0.02, 0.02};
    tex.color_b = Rgb{0.98, 0.98, 0.98};
    return tex;
}

// camera mode: static backdrop, spline camera path with look targets straight
// ahead so the orientation stays level
ClipRender render_camera_clip(const PipelineConfig& cfg, int index, Rng& rng) {
    ClipRender clip;
    clip.angle = rng.uniform(0, 2 * kPi);
    clip.speed = rng.uniform(cfg.speed_min, cfg.speed_max);
    const Vec3 vel{clip.speed * std::cos(clip.angle), clip.speed * std::sin(clip.angle), 0};

    std::vector<Vec3> keypoints, targets;
    const int nk = std::max(2, cfg.trajectory_keypoints);
    for (int k = 0; k < nk; ++k) {
        double u = static_cast<double>(k) / (nk - 1);
        keypoints.push_back(vel * (u * (cfg.frames - 1)));
    }
    targets = {keypoints.front() + Vec3{0, 0, cfg.scene_depth},
               keypoints.back() + Vec3{0, 0, cfg.scene_depth}};
    clip.traj = nurbs_trajectory(keypoints, targets, cfg.frames, cfg.trajectory_degree,
                                 make_intrinsics(cfg));

    SceneSpec scene;
    scene.objects.push_back(SceneSpec::backdrop_plane(cfg.scene_depth, backdrop_texture(cfg)));
    clip.frames = render_frames(scene, clip.traj);
    for (int i = 0; i + 1 < cfg.frames; ++i) {
        clip.fwd.push_back(render_flow(scene, clip.traj, i));
        clip.bwd.push_back(render_flow_backward(scene, clip.traj, i));
    }
    (void)index;
    return clip;
}

// human-like mode: fixed hemisphere-sampled camera, ground plane, one
// textured square sliding in its own plane
ClipRender render_object_clip(const PipelineConfig& cfg, int index, Rng& rng,
                              std::uint64_t camera_seed) {
    ClipRender clip;
    clip.angle = rng.uniform(0, 2 * kPi);
    clip.speed = rng.uniform(cfg.speed_min, cfg.speed_max);
    const double ox = rng.uniform(-0.4, 0.4);
    const double oz = rng.uniform(-0.4, 0.4);

    const Vec3 center{0, 0.8, 0};
    Rng crng(camera_seed);
    double up = crng.uniform(cfg.hemisphere_min_up, 1.0);
    double azim = crng.uniform(0, 2 * kPi);
    double s = std::sqrt(std::max(0.0, 1.0 - up * up));
    Vec3 cam_pos = center + Vec3{s * std::cos(azim), up, s * std::sin(azim)} * cfg.hemisphere_radius;
    CameraPose cam = CameraPose::look_at(cam_pos, center);

    Texture ground_tex = backdrop_texture(cfg);
    ground_tex.color_a = Rgb{0.02, 0.02, 0.02};
    ground_tex.color_b = Rgb{0.40, 0.40, 0.40};
    Texture square_tex = backdrop_texture(cfg);
    square_tex.scale = cfg.texture_scale * 0.7;
    square_tex.scale2 = 0.0;
    square_tex.color_a = Rgb{0.55, 0.55, 0.55};
    square_tex.color_b = Rgb{0.98, 0.98, 0.98};

    SceneSpec scene;
    SceneObject ground;
    ground.shape = ShapeKind::plane;
    ground.texture = ground_tex;
    RigidTransform gp;
    gp.rotation = Mat3::rot_x(-kPi / 2);  // plane y = 0
    ground.motion = {gp};
    scene.objects.push_back(ground);

    SceneObject square;
    square.shape = ShapeKind::plane;
    square.half_extent = 1.0;
    square.texture = square_tex;
    for (int i = 0; i < cfg.frames; ++i) {
        RigidTransform rt;
        rt.rotation = Mat3::rot_x(-kPi / 2);
        rt.translation = Vec3{ox + clip.speed * std::cos(clip.angle) * i, 0.8,
                              oz + clip.speed * std::sin(clip.angle) * i};
        square.motion.push_back(rt);
    }
    scene.objects.push_back(square);

    clip.traj.intrinsics = make_intrinsics(cfg);
    for (int i = 0; i < cfg.frames; ++i) clip.traj.frames.push_back({i, cam});

    clip.frames = render_frames(scene, clip.traj);
    for (int i = 0; i + 1 < cfg.frames; ++i) {
        clip.fwd.push_back(render_flow(scene, clip.traj, i));
        clip.bwd.push_back(render_flow_backward(scene, clip.traj, i));
    }
    (void)index;
    return clip;
}

// block-matching flow for one source/target frame pair
FlowField estimate_pair(const Image<Rgb>& a, const Image<Rgb>& b, const BlockMatchConfig& bm) {
    FrameSequence pair;
    pair.frames = {a, b};
    return estimate_flow_naive(pair, bm)[0];
}

std::string zero_pad(int v, int width = 3) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%0*d", width, v);
    return buf;
}

FrameSequence load_frames(const std::filesystem::path& root,
                          const std::vector<std::string>& paths) {
    FrameSequence seq;
    for (const auto& p : paths) seq.frames.push_back(read_png_rgb8(root / p));
    return seq;
}

std::vector<FlowField> load_flows(const std::filesystem::path& root,
                                  const std::vector<std::string>& paths) {
    std::vector<FlowField> flows;
    for (const auto& p : paths) flows.push_back(read_flow_with_mask(root / p));
    return flows;
}

const ManifestEntry& find_entry(const DatasetManifest& manifest, const std::string& clip_id) {
    if (clip_id.empty()) {
        for (const auto& e : manifest.entries)
            if (e.kept) return e;
        throw std::runtime_error("manifest has no kept entries");
    }
    for (const auto& e : manifest.entries)
        if (e.id == clip_id) return e;
    throw std::runtime_error("clip '" + clip_id + "' not found in manifest");
}

NetConfig make_net_config(const PipelineConfig& cfg, const StageTrainConfig& stage,
                          const std::string& which) {
    NetConfig net;
    if (which == "motion") {
        net.sample_channels = (cfg.frames - 1) * 3;
        net.cond_channels = cfg.mode == "camera" ? 6 * cfg.frames : 0;
    } else {
        net.sample_channels = cfg.frames;
        net.cond_channels = (cfg.frames - 1) * 3;
    }
    net.height = cfg.resolution;
    net.width = cfg.resolution;
    net.hidden = stage.hidden;
    net.control_hidden = stage.control_hidden;
    net.blocks = stage.blocks;
    net.kernel = stage.kernel;
    net.coord_frequencies = stage.coord_frequencies;
    net.predict_clean_sample = stage.predict_clean_sample;
    return net;
}

FMConfig make_fm_config(const PipelineConfig& cfg, const StageTrainConfig& stage,
                        const NetConfig& net) {
    FMConfig fm;
    fm.net = net;
    fm.integrator_steps = cfg.integrator_steps;
    fm.learning_rate = stage.learning_rate;
    fm.batch_size = stage.batch_size;
    fm.mixture_ratio = stage.mixture_ratio;
    fm.pretrain_steps = stage.pretrain_steps;
    fm.finetune_steps = stage.finetune_steps;
    fm.time_sampling = stage.parsed_time_sampling();
    fm.final_lr_fraction = stage.final_lr_fraction;
    return fm;
}

std::vector<PluckerMap> trajectory_pluckers(const Trajectory& traj) {
    std::vector<PluckerMap> maps;
    for (const auto& f : traj.frames) maps.push_back(plucker_embedding(traj.intrinsics, f.pose));
    return maps;
}

void write_frames(const std::filesystem::path& dir, const FrameSequence& frames) {
    std::filesystem::create_directories(dir);
    for (int i = 0; i < frames.count(); ++i)
        write_png_rgb8(dir / ("frame_" + zero_pad(i) + ".png"),
                       frames.frames[static_cast<std::size_t>(i)]);
}

}  // namespace

DatasetManifest cmd_gen_dataset(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.out / "frames");
    fs::create_directories(cfg.out / "flows");
    fs::create_directories(cfg.out / "trajectories");

    const std::uint64_t gen_seed = stage_seed(cfg.seed, "gen");
    const std::uint64_t cam_seed = stage_seed(cfg.seed, "gen-camera");
    const int n_real = static_cast<int>(std::lround(cfg.clips * cfg.real_fraction));

    DatasetManifest manifest;
    manifest.extra["mode"] = cfg.mode;
    // provenance record; the output path is wherever the manifest lives
    nlohmann::json cfg_record = cfg.to_json();
    cfg_record.erase("out");
    manifest.extra["config"] = cfg_record;

    for (int i = 0; i < cfg.clips; ++i) {
        Rng rng(mix_seed(gen_seed, static_cast<std::uint64_t>(i)));
        ClipRender clip =
            cfg.mode == "camera"
                ? render_camera_clip(cfg, i, rng)
                : render_object_clip(cfg, i, rng,
                                     cfg.shared_camera ? cam_seed
                                                       : mix_seed(cam_seed, static_cast<std::uint64_t>(i)));
        clip.id = "clip_" + zero_pad(i);
        clip.synthetic = i >= n_real;

        ManifestEntry entry;
        entry.id = clip.id;
        entry.source = clip.synthetic ? "synthetic" : "real";
        entry.extra["speed"] = clip.speed;
        entry.extra["angle"] = clip.angle;

        const fs::path frame_dir = fs::path("frames") / clip.id;
        const fs::path flow_dir = fs::path("flows") / clip.id;
        fs::create_directories(cfg.out / frame_dir);
        fs::create_directories(cfg.out / flow_dir);

        for (int f = 0; f < clip.frames.count(); ++f) {
            fs::path p = frame_dir / ("frame_" + zero_pad(f) + ".png");
            write_png_rgb8(cfg.out / p, clip.frames.frames[static_cast<std::size_t>(f)]);
            entry.frame_paths.push_back(p.generic_string());
        }

        for (std::size_t f = 0; f < clip.fwd.size(); ++f) {
            FlowField fwd = clip.fwd[f];
            FlowField bwd = clip.bwd[f];
            if (!clip.synthetic) {
                // the stand-in for an off-the-shelf estimator on sensor data
                const auto& a = clip.frames.frames[f];
                const auto& b = clip.frames.frames[f + 1];
                fwd = estimate_pair(a, b, cfg.block_match);
                bwd = estimate_pair(b, a, cfg.block_match);
            }
            fs::path pf = flow_dir / ("flow_" + zero_pad(static_cast<int>(f)) + ".flo");
            fs::path pb = flow_dir / ("flow_bwd_" + zero_pad(static_cast<int>(f)) + ".flo");
            write_flow_with_mask(cfg.out / pf, fwd);
            write_flow_with_mask(cfg.out / pb, bwd);
            entry.flow_paths.push_back(pf.generic_string());
            entry.flow_backward_paths.push_back(pb.generic_string());
        }

        fs::path tp = fs::path("trajectories") / (clip.id + ".json");
        save_trajectory(cfg.out / tp, clip.traj);
        entry.trajectory_path = tp.generic_string();

        manifest.entries.push_back(std::move(entry));
    }

    manifest.save(cfg.manifest_path());
    return manifest;
}

double cmd_encode(const PipelineConfig& cfg) {
    DatasetManifest manifest = DatasetManifest::load(cfg.manifest_path());
    std::vector<FlowField> all;
    for (const auto& e : manifest.entries) {
        if (!e.kept) continue;
        for (const auto& f : load_flows(cfg.out, e.flow_paths)) all.push_back(std::move(f));
    }
    const double sf = compute_scale_factor(all, cfg.codec_percentile);

    for (auto& e : manifest.entries) {
        nlohmann::json encoded = nlohmann::json::array();
        std::filesystem::path dir = std::filesystem::path("encoded") / e.id;
        std::filesystem::create_directories(cfg.out / dir);
        auto flows = load_flows(cfg.out, e.flow_paths);
        for (std::size_t i = 0; i < flows.size(); ++i) {
            EncodedFlow enc = flow_to_rgb(normalize_flow(flows[i], sf));
            std::filesystem::path p = dir / ("flow_" + zero_pad(static_cast<int>(i)) + ".png");
            write_png_rgb8(cfg.out / p, enc.grid);
            encoded.push_back(p.generic_string());
        }
        e.extra["encoded_paths"] = encoded;
    }
    manifest.scale_factor_px = sf;
    manifest.save(cfg.manifest_path());
    return sf;
}

double cmd_filter(const PipelineConfig& cfg) {
    DatasetManifest manifest = DatasetManifest::load(cfg.manifest_path());
    ConsistencyReport report = score_manifest(manifest, cfg.out);
    auto [filtered, threshold] = filter_dataset(manifest, cfg.filter_percentile);
    filtered.save(cfg.manifest_path());

    json jr = report.to_json();
    jr["threshold_px"] = threshold;
    jr["percentile"] = cfg.filter_percentile;
    save_json_file(cfg.out / "report.json", jr);
    return threshold;
}

void cmd_train(const PipelineConfig& cfg, const std::string& stage) {
    if (stage != "motion" && stage != "video")
        throw std::invalid_argument("train: stage must be 'motion' or 'video'");
    DatasetManifest manifest = DatasetManifest::load(cfg.manifest_path());
    if (!(manifest.scale_factor_px > 0))
        throw std::runtime_error("train: manifest has no scale factor; run encode first");
    const double sf = manifest.scale_factor_px;

    const StageTrainConfig& sc = stage == "motion" ? cfg.motion : cfg.video;
    NetConfig net_cfg = make_net_config(cfg, sc, stage);
    FMConfig fm = make_fm_config(cfg, sc, net_cfg);

    TrainDataset data;
    for (const auto& e : manifest.entries) {
        if (!e.kept) continue;
        auto flows = load_flows(cfg.out, e.flow_paths);
        if (stage == "motion") {
            data.samples.push_back(encode_flows_tensor(flows, sf));
            if (net_cfg.cond_channels > 0) {
                Trajectory traj = load_trajectory(cfg.out / e.trajectory_path);
                data.conds.push_back(plucker_tensor(trajectory_pluckers(traj)));
            }
        } else {
            data.samples.push_back(frames_tensor(load_frames(cfg.out, e.frame_paths)));
            data.conds.push_back(encode_flows_tensor(flows, sf));
        }
        data.synthetic.push_back(e.source == "synthetic");
    }
    if (data.samples.empty()) throw std::runtime_error("train: no kept clips in manifest");

    VelocityNet model(net_cfg, stage_seed(cfg.seed, "init-" + stage));
    auto records = train(model, data, fm, stage_seed(cfg.seed, "train-" + stage));

    std::filesystem::create_directories(cfg.out / "checkpoints");
    save_checkpoint(cfg.out / "checkpoints" / (stage + ".ckpt"), model);

    std::ofstream log(cfg.out / "checkpoints" / (stage + "_train_log.jsonl"));
    for (const auto& r : records)
        log << json{{"step", r.step},
                    {"loss", r.loss},
                    {"real", r.real_count},
                    {"synthetic", r.synthetic_count}}
                   .dump()
            << "\n";
}

void cmd_generate(const PipelineConfig& cfg, const std::string& clip_id) {
    DatasetManifest manifest = DatasetManifest::load(cfg.manifest_path());
    VelocityNet motion = load_checkpoint(cfg.out / "checkpoints" / "motion.ckpt");
    VelocityNet video = load_checkpoint(cfg.out / "checkpoints" / "video.ckpt");

    FMConfig motion_fm = make_fm_config(cfg, cfg.motion, motion.config());
    FMConfig video_fm = make_fm_config(cfg, cfg.video, video.config());

    std::vector<PluckerMap> pluckers;
    const std::vector<PluckerMap>* cond = nullptr;
    if (motion.conditioned()) {
        const ManifestEntry& entry = find_entry(manifest, clip_id);
        Trajectory traj = load_trajectory(cfg.out / entry.trajectory_path);
        pluckers = trajectory_pluckers(traj);
        cond = &pluckers;
    }

    TwoStageResult result =
        two_stage_generate(motion, video, cond, motion_fm, video_fm, manifest.scale_factor_px,
                           stage_seed(cfg.seed, "generate"));

    namespace fs = std::filesystem;
    const fs::path dir = cfg.out / "generated" / "two_stage";
    fs::create_directories(dir / "flows");
    for (std::size_t i = 0; i < result.flows.size(); ++i) {
        write_flow_with_mask(dir / "flows" / ("flow_" + zero_pad(static_cast<int>(i)) + ".flo"),
                             result.flows[i]);
        EncodedFlow enc;
        enc.grid = Image<Rgb>(result.encoded_flows.w, result.encoded_flows.h);
        for (int y = 0; y < result.encoded_flows.h; ++y)
            for (int x = 0; x < result.encoded_flows.w; ++x)
                enc.grid.at(x, y) =
                    Rgb{clamp01(result.encoded_flows.at(static_cast<int>(i) * 3 + 0, y, x)),
                        clamp01(result.encoded_flows.at(static_cast<int>(i) * 3 + 1, y, x)),
                        clamp01(result.encoded_flows.at(static_cast<int>(i) * 3 + 2, y, x))};
        write_png_rgb8(dir / "flows" / ("flow_" + zero_pad(static_cast<int>(i)) + ".png"), enc.grid);
    }
    write_frames(dir / "frames", result.frames);
}

std::filesystem::path cmd_generate_conditioned(const PipelineConfig& cfg,
                                               const std::string& clip_id) {
    DatasetManifest manifest = DatasetManifest::load(cfg.manifest_path());
    VelocityNet video = load_checkpoint(cfg.out / "checkpoints" / "video.ckpt");
    FMConfig video_fm = make_fm_config(cfg, cfg.video, video.config());

    const ManifestEntry& entry = find_entry(manifest, clip_id);
    Tensor cond = encode_flows_tensor(load_flows(cfg.out, entry.flow_paths),
                                      manifest.scale_factor_px);
    Tensor gen = fm_sample(video, &cond, video_fm,
                           mix_seed(stage_seed(cfg.seed, "generate-cond"), fnv1a64(entry.id)));

    const std::filesystem::path dir = cfg.out / ("generated_" + entry.id);
    write_frames(dir, tensor_frames(gen));
    return dir;
}

MetricReport cmd_eval_frames(const PipelineConfig& cfg, const std::string& clip_id,
                             const std::filesystem::path& frames_dir) {
    DatasetManifest manifest = DatasetManifest::load(cfg.manifest_path());
    const ManifestEntry& entry = find_entry(manifest, clip_id);
    auto gt = load_flows(cfg.out, entry.flow_paths);

    std::vector<std::filesystem::path> files;
    for (const auto& p : std::filesystem::directory_iterator(frames_dir))
        if (p.path().extension() == ".png") files.push_back(p.path());
    std::sort(files.begin(), files.end());
    FrameSequence frames;
    for (const auto& p : files) frames.frames.push_back(read_png_rgb8(p));

    return motion_error_report(gt, estimate_flow_naive(frames, cfg.block_match));
}

json metric_report_json(const MetricReport& report) {
    json j{{"m_err", report.m_err}, {"m_rot_err", report.m_rot_err}};
    j["per_frame_m_err"] = report.per_frame_m_err;
    if (!report.per_frame_rot_err.empty()) j["per_frame_rot_err"] = report.per_frame_rot_err;
    return j;
}

std::vector<std::pair<double, double>> cmd_eval_snr(const PipelineConfig& cfg,
                                                    const std::string& clip_id) {
    DatasetManifest manifest = DatasetManifest::load(cfg.manifest_path());
    VelocityNet video = load_checkpoint(cfg.out / "checkpoints" / "video.ckpt");
    FMConfig video_fm = make_fm_config(cfg, cfg.video, video.config());
    const ManifestEntry& entry = find_entry(manifest, clip_id);
    auto gt = load_flows(cfg.out, entry.flow_paths);
    const double sf = manifest.scale_factor_px;

    std::vector<std::pair<double, double>> rows;
    const std::uint64_t base = stage_seed(cfg.seed, "eval-snr");
    for (double target : kSnrSweepDb) {
        std::vector<FlowField> noisy;
        for (std::size_t i = 0; i < gt.size(); ++i)
            noisy.push_back(add_noise_snr(gt[i],
                                          target,
                                          mix_seed(base, static_cast<std::uint64_t>(
                                                             1000 * target + static_cast<double>(i))))
                                .flow);
        Tensor cond = encode_flows_tensor(noisy, sf);
        Tensor gen = fm_sample(video, &cond, video_fm,
                               mix_seed(base, static_cast<std::uint64_t>(target)));
        auto est = estimate_flow_naive(tensor_frames(gen), cfg.block_match);
        rows.emplace_back(target, motion_error(gt, est));
    }
    return rows;
}

void cmd_viz(const PipelineConfig& cfg, const std::filesystem::path& flo_path,
             const std::filesystem::path& out_png, double scale_factor_px) {
    (void)cfg;
    FlowField flow = read_flow_with_mask(flo_path);
    EncodedFlow enc = flow_to_rgb(normalize_flow(flow, scale_factor_px));
    write_png_rgb8(out_png, enc.grid);
}

void write_color_wheel(const std::filesystem::path& out_png, int size) {
    Image<Rgb> wheel(size, size, Rgb{0, 0, 0});
    const double c = (size - 1) / 2.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            double dx = (x - c) / c, dy = (y - c) / c;
            double r = std::sqrt(dx * dx + dy * dy);
            if (r > 1.0) continue;
            double hue = std::atan2(dy, dx) * 180.0 / kPi;
            if (hue < 0) hue += 360.0;
            wheel.at(x, y) = hsv_to_rgb(hue, 1.0, r);
        }
    write_png_rgb8(out_png, wheel);
}

}  // namespace flowforge
