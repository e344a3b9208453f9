#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flowforge/flow.hpp"
#include "flowforge/manifest.hpp"

namespace flowforge {

// Cycle-consistency scoring and percentile filtering of a dataset manifest.
// Reference constants observed on the full-scale corpus this mirrors, kept
// for documentation and defaults; they are not reproduction targets:
inline constexpr double kDefaultFilterPercentile = 90.0;
inline constexpr double kReferenceCycleThresholdPx = 1.19;
inline constexpr double kReferenceCycleMaxPx = 1080.05;

struct ErrorMap {
    Image<double> error;
    Image<std::uint8_t> valid;

    ErrorMap() = default;
    ErrorMap(int w, int h) : error(w, h), valid(w, h, 0) {}
};

// e(p) = |fwd(p) + bwd(p + fwd(p))| with bilinear lookup of the backward
// field. Pixels whose warped position leaves the grid, or that touch an
// invalid pixel on either side, are excluded.
ErrorMap cycle_error_map(const FlowField& fwd, const FlowField& bwd);

// Mean error over valid pixels; throws std::domain_error when nothing is
// scorable.
double clip_score(const ErrorMap& map);

struct ClipScore {
    std::string id;
    double error = 0.0;
    long pixels = 0;
};

struct ConsistencyReport {
    std::vector<ClipScore> per_clip;
    double min_error = 0.0;
    double max_error = 0.0;
    std::map<int, double> percentiles;  // {50, 90, 99, 100}

    nlohmann::json to_json() const;
};

// Scores every entry that has forward/backward flow pairs, averaging the
// cycle error over all valid pixels of all frame pairs, and writes the score
// into entry.error.
ConsistencyReport score_manifest(DatasetManifest& manifest, const std::filesystem::path& root);

// Nearest-rank threshold over the clip scores of all entries; entries above
// it are marked kept=false. Returns the filtered manifest and the threshold.
std::pair<DatasetManifest, double> filter_dataset(const DatasetManifest& manifest,
                                                  double percentile = kDefaultFilterPercentile);

}  // namespace flowforge
