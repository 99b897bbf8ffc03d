#include "wfiso/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "wfiso/errors.hpp"
#include "wfiso/macrocell_grid.hpp"
#include "wfiso/reference_oracle.hpp"

namespace wfiso {

using nlohmann::json;

json to_json(const PassStats& s) {
    return json{{"pass_index", s.pass_index},
                {"n_active_before", s.n_active_before},
                {"n_spec", s.n_spec},
                {"visible_blocks", s.visible_blocks},
                {"active_blocks", s.active_blocks},
                {"new_decompressed", s.new_decompressed},
                {"cache_slots", s.cache_slots},
                {"utilization", s.utilization},
                {"completeness", s.completeness},
                {"duration", s.duration}};
}

json to_json(const std::vector<PassStats>& passes) {
    json arr = json::array();
    for (const auto& p : passes) arr.push_back(to_json(p));
    return arr;
}

Camera orbit_camera(Int3 dims, int step, int steps) {
    const Vec3f center{(dims.x - 1) / 2.f, (dims.y - 1) / 2.f, (dims.z - 1) / 2.f};
    const float radius = 1.8f * float(std::max({dims.x, dims.y, dims.z}));
    const double angle = 2.0 * std::numbers::pi * double(step) / double(std::max(1, steps));
    const Vec3f eye = center + Vec3f{float(std::cos(angle)) * radius, 0.f, float(std::sin(angle)) * radius};
    return Camera::look_at(eye, center, {0.f, 1.f, 0.f}, 45.f);
}

ValueRange trimmed_range(ValueRange r, double trim) {
    const double span = double(r.max) - double(r.min);
    return {float(r.min + trim * span), float(r.max - trim * span)};
}

std::vector<float> sample_isovalues(ValueRange range, int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<float> out(size_t(std::max(0, n)));
    for (auto& iso : out) {
        const double u = double(rng() >> 11) * 0x1.0p-53;
        iso = float(double(range.min) + u * (double(range.max) - double(range.min)));
    }
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

json run_bench(const CompressedVolume& cv, const BenchConfig& config) {
    if (config.n_isovalues < 1) throw UsageError("bench needs at least one isovalue");
    if (config.orbit_steps < 1) throw UsageError("bench needs at least one orbit step");

    const MacrocellGrids grids = build_grids(cv);
    const ValueRange decoded = decode_full(cv).value_range();
    const ValueRange iso_range = config.iso_range.value_or(trimmed_range(decoded));
    const std::vector<float> isovalues = sample_isovalues(iso_range, config.n_isovalues, config.seed);
    const double block_count = double(cv.block_count());

    RenderOptions opts;
    opts.width = config.width;
    opts.height = config.height;
    opts.speculation = config.speculation;
    opts.max_spec = config.max_spec;

    std::vector<double> pass_counts, spec_counts, run_visible_fraction, run_active_blocks, utilization;
    std::vector<std::vector<double>> run_completeness;
    uint64_t total_decompressed = 0;
    uint32_t max_cache_slots = 0;
    double total_seconds = 0.0;
    json runs = json::array();

    for (size_t k = 0; k < isovalues.size(); ++k) {
        for (int step = 0; step < config.orbit_steps; ++step) {
            const Camera cam = orbit_camera(cv.dims(), step, config.orbit_steps);
            const auto start = std::chrono::steady_clock::now();
            const RenderResult r = render(cv, grids, cam, isovalues[k], opts);
            total_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

            double visible = 0.0, active = 0.0;
            uint64_t decompressed = 0;
            for (const auto& p : r.passes) {
                visible += p.visible_blocks;
                active += p.active_blocks;
                decompressed += p.new_decompressed;
                spec_counts.push_back(p.n_spec);
                utilization.push_back(p.utilization);
                max_cache_slots = std::max(max_cache_slots, p.cache_slots);
            }
            const double n_passes = double(r.passes.size());
            const double avg_visible = n_passes > 0 ? visible / n_passes : 0.0;
            pass_counts.push_back(n_passes);
            run_visible_fraction.push_back(avg_visible / block_count);
            run_active_blocks.push_back(n_passes > 0 ? active / n_passes : 0.0);
            total_decompressed += decompressed;

            std::vector<double> completeness;
            for (const auto& p : r.passes) completeness.push_back(p.completeness);
            run_completeness.push_back(std::move(completeness));
            runs.push_back({{"iso", isovalues[k]},
                            {"camera", step},
                            {"passes", r.passes.size()},
                            {"final_completeness", r.image.completeness},
                            {"avg_visible_blocks", avg_visible},
                            {"new_decompressed", decompressed}});
        }
    }

    // completeness by pass index; finished renders hold their final value
    size_t max_passes = 0;
    for (const auto& c : run_completeness) max_passes = std::max(max_passes, c.size());
    std::vector<double> completeness_by_pass(max_passes, 0.0);
    for (const auto& c : run_completeness) {
        for (size_t p = 0; p < max_passes; ++p) completeness_by_pass[p] += c.empty() ? 1.0 : c[std::min(p, c.size() - 1)];
    }
    for (auto& c : completeness_by_pass) c /= double(run_completeness.size());

    auto mean = [](const std::vector<double>& v) {
        return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
    };

    json report{{"report_version", kReportVersion},
                {"volume", {{"dims", {cv.dims().x, cv.dims().y, cv.dims().z}},
                            {"qbits", cv.qbits()},
                            {"block_count", cv.block_count()},
                            {"value_range", {decoded.min, decoded.max}}}},
                {"config", {{"n_isovalues", config.n_isovalues},
                            {"orbit_steps", config.orbit_steps},
                            {"width", config.width},
                            {"height", config.height},
                            {"seed", config.seed},
                            {"iso_range", {iso_range.min, iso_range.max}},
                            {"speculation", config.speculation},
                            {"max_spec", config.max_spec}}},
                {"summary", {{"renders", pass_counts.size()},
                             {"median_passes", median(pass_counts)},
                             {"avg_visible_block_fraction", mean(run_visible_fraction)},
                             {"avg_active_blocks_per_pass", mean(run_active_blocks)},
                             {"median_spec_count", median(spec_counts)},
                             {"avg_utilization", mean(utilization)},
                             {"completeness_by_pass", completeness_by_pass},
                             {"total_new_decompressed", total_decompressed},
                             {"max_cache_slots", max_cache_slots}}},
                {"runs", runs}};
    if (config.include_timing) report["summary"]["total_seconds"] = total_seconds;
    return report;
}

}  // namespace wfiso
