#include "flowforge/filter.hpp"

#include <stdexcept>

#include "flowforge/flo_io.hpp"

namespace flowforge {

ErrorMap cycle_error_map(const FlowField& fwd, const FlowField& bwd) {
    if (fwd.width() != bwd.width() || fwd.height() != bwd.height())
        throw std::invalid_argument("cycle_error_map: dimension mismatch");
    ErrorMap out(fwd.width(), fwd.height());
    for (int y = 0; y < fwd.height(); ++y) {
        for (int x = 0; x < fwd.width(); ++x) {
            if (!fwd.is_valid(x, y)) continue;
            const Vec2& f = fwd.grid.at(x, y);
            auto back = sample_bilinear(bwd, Vec2{x + f.x, y + f.y});
            if (!back) continue;
            out.error.at(x, y) = (f + *back).norm();
            out.valid.at(x, y) = 1;
        }
    }
    return out;
}

double clip_score(const ErrorMap& map) {
    double sum = 0.0;
    long count = 0;
    for (int y = 0; y < map.error.height(); ++y)
        for (int x = 0; x < map.error.width(); ++x)
            if (map.valid.at(x, y)) {
                sum += map.error.at(x, y);
                ++count;
            }
    if (count == 0) throw std::domain_error("clip_score: no valid pixels");
    return sum / count;
}

nlohmann::json ConsistencyReport::to_json() const {
    nlohmann::json clips = nlohmann::json::array();
    for (const auto& c : per_clip)
        clips.push_back({{"id", c.id}, {"error", c.error}, {"pixels", c.pixels}});
    nlohmann::json pct;
    for (const auto& [k, v] : percentiles) pct[std::to_string(k)] = v;
    return {{"clips", clips},
            {"min_error", min_error},
            {"max_error", max_error},
            {"percentiles", pct}};
}

ConsistencyReport score_manifest(DatasetManifest& manifest, const std::filesystem::path& root) {
    ConsistencyReport report;
    for (auto& entry : manifest.entries) {
        if (entry.flow_paths.empty() || entry.flow_paths.size() != entry.flow_backward_paths.size())
            throw std::runtime_error("score_manifest: clip '" + entry.id +
                                     "' lacks matching forward/backward flows");
        double sum = 0.0;
        long count = 0;
        for (std::size_t i = 0; i < entry.flow_paths.size(); ++i) {
            FlowField fwd = read_flow_with_mask(root / entry.flow_paths[i]);
            FlowField bwd = read_flow_with_mask(root / entry.flow_backward_paths[i]);
            ErrorMap em = cycle_error_map(fwd, bwd);
            for (int y = 0; y < em.error.height(); ++y)
                for (int x = 0; x < em.error.width(); ++x)
                    if (em.valid.at(x, y)) {
                        sum += em.error.at(x, y);
                        ++count;
                    }
        }
        if (count == 0) throw std::domain_error("score_manifest: clip '" + entry.id + "' unscorable");
        entry.error = sum / count;
        report.per_clip.push_back({entry.id, entry.error, count});
    }

    std::vector<double> scores;
    for (const auto& c : report.per_clip) scores.push_back(c.error);
    report.min_error = *std::min_element(scores.begin(), scores.end());
    report.max_error = *std::max_element(scores.begin(), scores.end());
    for (int p : {50, 90, 99, 100}) report.percentiles[p] = percentile_nearest_rank(scores, p);
    return report;
}

std::pair<DatasetManifest, double> filter_dataset(const DatasetManifest& manifest,
                                                  double percentile) {
    std::vector<double> scores;
    for (const auto& e : manifest.entries) scores.push_back(e.error);
    if (scores.empty()) throw std::invalid_argument("filter_dataset: no scored clips");
    const double threshold = percentile_nearest_rank(scores, percentile);

    DatasetManifest out = manifest;
    for (auto& e : out.entries) e.kept = e.error <= threshold;
    return {std::move(out), threshold};
}

}  // namespace flowforge
