#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "flowforge/pipeline.hpp"
#include "flowforge/serialize.hpp"

using namespace flowforge;
namespace fs = std::filesystem;

namespace {

PipelineConfig tiny_config(const fs::path& out, const std::string& mode) {
    PipelineConfig cfg;
    cfg.seed = 5;
    cfg.out = out;
    cfg.mode = mode;
    cfg.resolution = 16;
    cfg.frames = 3;
    cfg.clips = 4;
    cfg.focal = 20.0;
    cfg.speed_min = 0.15;
    cfg.speed_max = 0.3;
    cfg.block_match.search = 4;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("gen: rerunning with the same seed produces a byte-identical manifest") {
    TempDir tmp("flowforge_pipe_det");
    PipelineConfig a = tiny_config(tmp.path / "a", "camera");
    PipelineConfig b = tiny_config(tmp.path / "b", "camera");
    cmd_gen_dataset(a);
    cmd_gen_dataset(b);
    CHECK(slurp(a.manifest_path()) == slurp(b.manifest_path()));
    CHECK(slurp(tmp.path / "a/flows/clip_000/flow_000.flo") ==
          slurp(tmp.path / "b/flows/clip_000/flow_000.flo"));
}

TEST_CASE("gen: human-like clips keep one fixed pose across frames") {
    TempDir tmp("flowforge_pipe_human");
    PipelineConfig cfg = tiny_config(tmp.path / "run", "human-like");
    DatasetManifest m = cmd_gen_dataset(cfg);
    REQUIRE(m.entries.size() == 4);
    for (const auto& e : m.entries) {
        Trajectory traj = load_trajectory(cfg.out / e.trajectory_path);
        REQUIRE(traj.count() == 3);
        for (int i = 1; i < traj.count(); ++i) {
            const auto& p0 = traj.frames[0].pose;
            const auto& pi = traj.frames[static_cast<std::size_t>(i)].pose;
            CHECK((pi.position - p0.position).norm() == 0.0);
            CHECK(rotation_geodesic(pi.rotation, p0.rotation) <= 1e-12);
        }
    }
}

TEST_CASE("gen: camera clips satisfy the look-at invariant") {
    TempDir tmp("flowforge_pipe_cam");
    PipelineConfig cfg = tiny_config(tmp.path / "run", "camera");
    DatasetManifest m = cmd_gen_dataset(cfg);
    for (const auto& e : m.entries) {
        Trajectory traj = load_trajectory(cfg.out / e.trajectory_path);
        for (const auto& f : traj.frames) {
            // the per-frame look target sits straight ahead of the path
            Vec3 target = f.pose.position + Vec3{0, 0, cfg.scene_depth};
            auto px = project(target, traj.intrinsics, f.pose);
            REQUIRE(px.has_value());
            CHECK(std::abs(px->x - traj.intrinsics.cx) <= 1e-6);
            CHECK(std::abs(px->y - traj.intrinsics.cy) <= 1e-6);
        }
    }
}

TEST_CASE("gen: real clips carry estimated flows, synthetic clips exact flows") {
    TempDir tmp("flowforge_pipe_sources");
    PipelineConfig cfg = tiny_config(tmp.path / "run", "camera");
    DatasetManifest m = cmd_gen_dataset(cfg);
    int real = 0, synthetic = 0;
    for (const auto& e : m.entries) {
        if (e.source == "real") ++real;
        if (e.source == "synthetic") ++synthetic;
        CHECK(e.flow_paths.size() == 2);  // frames-1 pairs
        CHECK(e.flow_backward_paths.size() == 2);
        CHECK(e.frame_paths.size() == 3);
    }
    CHECK(real == 2);
    CHECK(synthetic == 2);
}

TEST_CASE("encode + filter: scale factor recorded, percentile 100 keeps everything") {
    TempDir tmp("flowforge_pipe_encode");
    PipelineConfig cfg = tiny_config(tmp.path / "run", "camera");
    cmd_gen_dataset(cfg);
    double sf = cmd_encode(cfg);
    CHECK(sf > 0.0);
    DatasetManifest m = DatasetManifest::load(cfg.manifest_path());
    CHECK(m.scale_factor_px == sf);
    for (const auto& e : m.entries) {
        REQUIRE(e.extra.contains("encoded_paths"));
        for (const auto& p : e.extra.at("encoded_paths"))
            CHECK(fs::exists(cfg.out / p.get<std::string>()));
    }

    cfg.filter_percentile = 100.0;
    cmd_filter(cfg);
    DatasetManifest filtered = DatasetManifest::load(cfg.manifest_path());
    for (const auto& e : filtered.entries) CHECK(e.kept);
    CHECK(fs::exists(cfg.out / "report.json"));

    // synthetic clips carry exact flows, so their cycle error is tiny
    for (const auto& e : filtered.entries)
        if (e.source == "synthetic") CHECK(e.error <= 1e-3);
}

TEST_CASE("train: deterministic checkpoint bytes given (config, seed)") {
    TempDir tmp("flowforge_pipe_train_det");
    PipelineConfig cfg = tiny_config(tmp.path / "run", "camera");
    cfg.motion.hidden = 6;
    cfg.motion.control_hidden = 4;
    cfg.motion.coord_frequencies = 1;
    cfg.motion.pretrain_steps = 2;
    cfg.motion.finetune_steps = 3;
    cfg.motion.batch_size = 2;
    cmd_gen_dataset(cfg);
    cmd_encode(cfg);

    cmd_train(cfg, "motion");
    std::string first = slurp(cfg.out / "checkpoints" / "motion.ckpt");
    std::string first_log = slurp(cfg.out / "checkpoints" / "motion_train_log.jsonl");
    cmd_train(cfg, "motion");
    CHECK(slurp(cfg.out / "checkpoints" / "motion.ckpt") == first);
    CHECK(slurp(cfg.out / "checkpoints" / "motion_train_log.jsonl") == first_log);
    CHECK(!first_log.empty());
}

TEST_CASE("config json roundtrip with overrides") {
    PipelineConfig cfg;
    CHECK(cfg.frames == 121);  // full-scale default
    CHECK(cfg.codec_percentile == 99.0);
    CHECK(cfg.filter_percentile == 90.0);

    nlohmann::json j = tiny_config("somewhere", "camera").to_json();
    PipelineConfig back = PipelineConfig::from_json(j);
    CHECK(back.resolution == 16);
    CHECK(back.frames == 3);
    CHECK(back.mode == "camera");
    CHECK(back.block_match.search == 4);

    j["mode"] = "flying";
    CHECK_THROWS_AS(PipelineConfig::from_json(j), std::invalid_argument);
}

TEST_CASE("color wheel legend writes a valid png") {
    TempDir tmp("flowforge_pipe_wheel");
    write_color_wheel(tmp.path / "wheel.png", 64);
    CHECK(fs::exists(tmp.path / "wheel.png"));
}
