#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "flowforge/flo_io.hpp"
#include "flowforge/manifest.hpp"
#include "flowforge/png_io.hpp"
#include "flowforge/rng.hpp"
#include "flowforge/serialize.hpp"

using namespace flowforge;

namespace {

std::filesystem::path tmp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("flo roundtrip is bit-exact and the header carries the magic") {
    FlowField flow(13, 7);
    Rng rng(1);
    // dyadic rationals are exactly representable in float32, so the
    // roundtrip must be bit-exact
    for (auto& v : flow.grid)
        v = Vec2{rng.uniform_int(-2048, 2047) / 256.0, rng.uniform_int(-2048, 2047) / 256.0};
    flow.invalidate(3, 2);

    auto path = tmp_file("flowforge_io_test.flo");
    write_flow_with_mask(path, flow);

    // magic bytes spell PIEH
    std::ifstream is(path, std::ios::binary);
    char magic[4];
    is.read(magic, 4);
    CHECK(std::memcmp(magic, "PIEH", 4) == 0);
    is.close();

    FlowField back = read_flow_with_mask(path);
    REQUIRE(back.width() == 13);
    REQUIRE(back.height() == 7);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 13; ++x) {
            CHECK(back.grid.at(x, y).x == flow.grid.at(x, y).x);
            CHECK(back.grid.at(x, y).y == flow.grid.at(x, y).y);
            CHECK(back.is_valid(x, y) == flow.is_valid(x, y));
        }
    std::filesystem::remove(path);
    std::filesystem::remove(mask_path_for(path));

    CHECK_THROWS_AS(read_flo(tmp_file("flowforge_does_not_exist.flo")), std::runtime_error);
}

TEST_CASE("flo reader rejects corrupt headers") {
    auto path = tmp_file("flowforge_bad.flo");
    std::ofstream os(path, std::ios::binary);
    os << "JUNKJUNKJUNK";
    os.close();
    CHECK_THROWS_AS(read_flo(path), std::runtime_error);
    std::filesystem::remove(path);
}

TEST_CASE("png roundtrip: rgb and gray") {
    Image<Rgb> img(9, 5);
    Rng rng(2);
    for (auto& c : img) c = Rgb{rng.uniform(), rng.uniform(), rng.uniform()};
    auto path = tmp_file("flowforge_io_test_rgb.png");
    write_png_rgb8(path, img);
    Image<Rgb> back = read_png_rgb8(path);
    REQUIRE(back.width() == 9);
    REQUIRE(back.height() == 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 9; ++x) {
            // exact at 8-bit resolution
            CHECK(std::abs(back.at(x, y).r - img.at(x, y).r) <= 0.5 / 255.0 + 1e-12);
            CHECK(std::abs(back.at(x, y).g - img.at(x, y).g) <= 0.5 / 255.0 + 1e-12);
            CHECK(std::abs(back.at(x, y).b - img.at(x, y).b) <= 0.5 / 255.0 + 1e-12);
        }
    std::filesystem::remove(path);

    Image<std::uint8_t> gray(6, 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x) gray.at(x, y) = static_cast<std::uint8_t>(x * 40 + y);
    auto gpath = tmp_file("flowforge_io_test_gray.png");
    write_png_gray8(gpath, gray);
    Image<std::uint8_t> gback = read_png_gray8(gpath);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 6; ++x) CHECK(gback.at(x, y) == gray.at(x, y));
    std::filesystem::remove(gpath);
}

TEST_CASE("pose and trajectory json roundtrip") {
    CameraPose pose = CameraPose::look_at(Vec3{1, 2, 3}, Vec3{0, 0, 10});
    CameraPose back = pose_from_json(to_json(pose));
    CHECK((back.position - pose.position).norm() == 0.0);
    for (int i = 0; i < 9; ++i) CHECK(back.rotation.m[static_cast<std::size_t>(i)] ==
                                      pose.rotation.m[static_cast<std::size_t>(i)]);

    Trajectory traj = nurbs_trajectory({{0, 0, 0}, {1, 1, 0}, {2, 0, 1}, {3, 1, 1}},
                                       {Vec3{1.5, 0.5, 8}}, 6, 3,
                                       CameraIntrinsics{60, 60, 16, 16, 32, 32});
    auto path = tmp_file("flowforge_io_test_traj.json");
    save_trajectory(path, traj);
    Trajectory tback = load_trajectory(path);
    REQUIRE(tback.count() == traj.count());
    for (int i = 0; i < traj.count(); ++i) {
        CHECK(tback.frames[static_cast<std::size_t>(i)].n == traj.frames[static_cast<std::size_t>(i)].n);
        CHECK((tback.frames[static_cast<std::size_t>(i)].pose.position -
               traj.frames[static_cast<std::size_t>(i)].pose.position)
                  .norm() == 0.0);
    }
    std::filesystem::remove(path);
}

TEST_CASE("nurbs spec json keeps the explicit knot vector") {
    auto spec = NurbsSpec::clamped_uniform({{0, 0, 0}, {1, 1, 0}, {2, 0, 0}, {3, 2, 1}}, 2);
    NurbsSpec back = nurbs_from_json(to_json(spec));
    CHECK(back.knots == spec.knots);
    CHECK(back.degree == spec.degree);
    CHECK(back.weights == spec.weights);
    CHECK((nurbs_eval(back, 0.37) - nurbs_eval(spec, 0.37)).norm() == 0.0);
}

TEST_CASE("manifest roundtrip preserves unknown keys") {
    DatasetManifest m;
    m.scale_factor_px = 12.5;
    m.extra["pipeline_note"] = "desk run";
    ManifestEntry e;
    e.id = "clip_000";
    e.source = "synthetic";
    e.flow_paths = {"flows/clip_000/000.flo"};
    e.flow_backward_paths = {"flows/clip_000/000_bwd.flo"};
    e.frame_paths = {"frames/clip_000/000.png", "frames/clip_000/001.png"};
    e.trajectory_path = "trajectories/clip_000.json";
    e.error = 0.004;
    e.extra["custom_tag"] = 42;
    m.entries.push_back(e);

    auto path = tmp_file("flowforge_io_test_manifest.json");
    m.save(path);
    DatasetManifest back = DatasetManifest::load(path);
    CHECK(back.scale_factor_px == 12.5);
    CHECK(back.extra.at("pipeline_note") == "desk run");
    REQUIRE(back.entries.size() == 1);
    CHECK(back.entries[0].id == "clip_000");
    CHECK(back.entries[0].extra.at("custom_tag") == 42);
    CHECK(back.entries[0].trajectory_path == "trajectories/clip_000.json");

    // rewrite keeps the unknown keys
    back.save(path);
    DatasetManifest again = DatasetManifest::load(path);
    CHECK(again.entries[0].extra.at("custom_tag") == 42);
    CHECK(again.extra.at("pipeline_note") == "desk run");
    std::filesystem::remove(path);
}

TEST_CASE("manifest rejects unknown source tags") {
    nlohmann::json j;
    j["entries"] = nlohmann::json::array();
    j["entries"].push_back({{"id", "x"}, {"source", "dreamed"}});
    CHECK_THROWS_AS(DatasetManifest::from_json(j), std::runtime_error);
}
