#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "wfiso/block_codec.hpp"
#include "wfiso/grid_traversal.hpp"
#include "wfiso/wavefront_engine.hpp"

namespace wfiso {

inline constexpr int kReportVersion = 1;

nlohmann::json to_json(const PassStats& s);
nlohmann::json to_json(const std::vector<PassStats>& passes);

/// Camera k of an equal-angle orbit: circle of radius 1.8 * max_dim in the
/// y = center plane, looking at the volume center, fov 45 degrees.
Camera orbit_camera(Int3 dims, int step, int steps);

/// Isovalue sampling interval: the value range trimmed by 5% at each end.
ValueRange trimmed_range(ValueRange r, double trim = 0.05);

/// n isovalues drawn uniformly from [lo, hi] with a portable mt19937_64 stream.
std::vector<float> sample_isovalues(ValueRange range, int n, uint64_t seed);

struct BenchConfig {
    int n_isovalues = 100;
    int orbit_steps = 10;
    int width = 1280;
    int height = 720;
    uint64_t seed = 0;
    std::optional<ValueRange> iso_range;  // default: trimmed decoded range
    bool speculation = true;
    uint32_t max_spec = kDefaultMaxSpec;
    bool include_timing = false;  // timings make the report non-reproducible
};

double median(std::vector<double> v);

/// Renders every (isovalue, orbit camera) pair and aggregates pass counts,
/// visible-block fractions, speculation counts, utilization, completeness by
/// pass and cache traffic.
nlohmann::json run_bench(const CompressedVolume& cv, const BenchConfig& config);

}  // namespace wfiso
