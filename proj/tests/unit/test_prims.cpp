#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "wfiso/errors.hpp"
#include "wfiso/parallel_prims.hpp"

using namespace wfiso;

TEST_CASE("exclusive scan examples") {
    const std::vector<uint32_t> in{1, 0, 1, 1};
    const ScanResult r = exclusive_scan(std::span<const uint32_t>(in));
    CHECK(r.offsets == std::vector<uint32_t>{0, 1, 1, 2});
    CHECK(r.total == 3);
    const ScanResult e = exclusive_scan(std::span<const uint32_t>());
    CHECK(e.offsets.empty());
    CHECK(e.total == 0);
}

TEST_CASE("exclusive scan overflow is an internal error") {
    const std::vector<uint32_t> in{0xFFFFFFFFu, 1u};
    CHECK_THROWS_AS(exclusive_scan(std::span<const uint32_t>(in)), PipelineError);
}

TEST_CASE("compact examples") {
    const std::vector<uint32_t> v{9, 8, 7};
    const std::vector<uint8_t> m{1, 0, 1};
    CHECK(compact<uint32_t>(v, m) == std::vector<uint32_t>{9, 7});
    const std::vector<uint8_t> none{0, 0, 0};
    CHECK(compact<uint32_t>(v, none).empty());
    const std::vector<uint8_t> short_mask{1};
    CHECK_THROWS_AS(compact<uint32_t>(v, short_mask), PipelineError);
}

TEST_CASE("sort_by_key is stable") {
    const std::vector<uint32_t> k{3, 1, 3, 2}, v{0, 1, 2, 3};
    const SortedPairs s = sort_by_key(k, v);
    CHECK(s.keys == std::vector<uint32_t>{1, 2, 3, 3});
    CHECK(s.values == std::vector<uint32_t>{1, 3, 0, 2});
    const std::vector<uint32_t> sorted{1, 2, 2, 5, 9}, idx{0, 1, 2, 3, 4};
    const SortedPairs same = sort_by_key(sorted, idx);
    CHECK(same.keys == sorted);
    CHECK(same.values == idx);
    CHECK_THROWS_AS(sort_by_key(sorted, std::vector<uint32_t>{1}), PipelineError);
}

TEST_CASE("randomized prims match sequential oracles") {
    std::mt19937_64 rng(42);
    for (int round = 0; round < 5; ++round) {
        const size_t n = 1000 + rng() % 20000;
        std::vector<uint32_t> vals(n), keys(n), ids(n);
        std::vector<uint8_t> mask(n);
        const uint32_t key_range = round % 2 ? 50u : 0xFFFFFFFFu;
        for (size_t i = 0; i < n; ++i) {
            vals[i] = uint32_t(rng() % 1000);
            mask[i] = uint8_t(rng() % 3 == 0);
            keys[i] = key_range == 0xFFFFFFFFu ? uint32_t(rng()) : uint32_t(rng() % key_range);
            ids[i] = uint32_t(i);
        }
        uint32_t total = 0;
        const auto want = oracle::exclusive_scan(vals, &total);
        const ScanResult got = exclusive_scan(std::span<const uint32_t>(vals));
        CHECK(got.offsets == want);
        CHECK(got.total == total);

        const std::vector<uint32_t> mask32(mask.begin(), mask.end());
        const auto want_mask = oracle::exclusive_scan(mask32, &total);
        const ScanResult got_mask = exclusive_scan(std::span<const uint8_t>(mask));
        CHECK(got_mask.offsets == want_mask);
        CHECK(got_mask.total == total);

        CHECK(compact<uint32_t>(vals, mask) == oracle::compact(vals, mask));
        const auto [ok, ov] = oracle::stable_sort(keys, ids);
        const SortedPairs s = sort_by_key(keys, ids);
        CHECK(s.keys == ok);
        CHECK(s.values == ov);
    }
}
