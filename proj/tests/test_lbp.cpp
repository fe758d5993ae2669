#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "kpath/lbp.hpp"
#include "oracles/lbp_oracle.hpp"
#include "test_util.hpp"

using namespace kpath;

TEST_CASE("LbpConfig validation and histogram sizes") {
    CHECK(LbpConfig{8, 1, false, false}.histogram_size() == 256);
    CHECK(LbpConfig{8, 1, true, false}.histogram_size() == 59);
    CHECK(LbpConfig{24, 4, true, false}.histogram_size() == 555);
    CHECK_THROWS_AS(LbpConfig({3, 1, true, false}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(LbpConfig({8, 0, true, false}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(LbpConfig({20, 1, false, false}).validate(), std::invalid_argument);
    CHECK_NOTHROW(LbpConfig({16, 1, false, false}).validate());
    CHECK_NOTHROW(LbpConfig({24, 5, true, false}).validate());
}

TEST_CASE("sample_neighbor") {
    SUBCASE("constant image") {
        GrayImage img(9, 9, 42);
        for (int p : {4, 8, 12, 24})
            for (int k = 0; k < p; ++k) CHECK(sample_neighbor(img, 4, 4, k, LbpConfig{p, 3, true, false}) == 42.0);
    }
    SUBCASE("p=4 r=1 k=0 reads the pixel one row below exactly") {
        std::mt19937_64 rng(3);
        const auto img = testutil::random_gray(7, 7, rng);
        for (int cy = 1; cy < 6; ++cy)
            for (int cx = 1; cx < 6; ++cx)
                CHECK(sample_neighbor(img, cx, cy, 0, LbpConfig{4, 1, false, false}) == img(cx, cy + 1));
    }
    SUBCASE("axis samples at p=4 go below, left, above, right") {
        RealImage img(5, 5);
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 5; ++x) img(x, y) = 10 * y + x;
        const LbpConfig cfg{4, 2, false, false};
        CHECK(sample_neighbor(img, 2, 2, 0, cfg) == img(2, 4));
        CHECK(sample_neighbor(img, 2, 2, 1, cfg) == img(0, 2));
        CHECK(sample_neighbor(img, 2, 2, 2, cfg) == img(2, 0));
        CHECK(sample_neighbor(img, 2, 2, 3, cfg) == img(4, 2));
    }
    SUBCASE("p=8 r=1 k=1 on a 3x3 ramp blends four pixels") {
        // I(x, y) = x + 3y. Sample point (1 - sqrt2/2, 1 + sqrt2/2); hand evaluation
        // of the bilinear weights over pixels 3, 4, 6, 7 gives 4 + sqrt(2).
        GrayImage img(3, 3);
        for (int y = 0; y < 3; ++y)
            for (int x = 0; x < 3; ++x) img(x, y) = static_cast<std::uint8_t>(x + 3 * y);
        CHECK(sample_neighbor(img, 1, 1, 1, LbpConfig{8, 1, false, false}) ==
              doctest::Approx(5.414213562373095).epsilon(1e-12));
    }
    SUBCASE("center too close to the border") {
        GrayImage img(5, 5, 1);
        CHECK_THROWS_AS(sample_neighbor(img, 0, 2, 0, LbpConfig{8, 1, false, false}), std::out_of_range);
        CHECK_THROWS_AS(sample_neighbor(img, 2, 2, 0, LbpConfig{8, 3, false, false}), std::out_of_range);
    }
}

TEST_CASE("lbp_code") {
    SUBCASE("flat patch: ties count as 1") {
        GrayImage img(3, 3, 77);
        CHECK(lbp_code(img, 1, 1, LbpConfig{8, 1, false, false}) == 255u);
    }
    SUBCASE("bright center, dark neighbors") {
        GrayImage img(3, 3, 0);
        img(1, 1) = 200;
        CHECK(lbp_code(img, 1, 1, LbpConfig{8, 1, false, false}) == 0u);
    }
    SUBCASE("dark center, bright neighbors, p=12") {
        GrayImage img(5, 5, 255);
        img(2, 2) = 0;
        CHECK(lbp_code(img, 2, 2, LbpConfig{12, 1, false, false}) == 4095u);
    }
    SUBCASE("bit 0 is the neighbor below") {
        GrayImage img(3, 3, 0);
        img(1, 1) = 100;
        img(1, 2) = 150;
        CHECK(lbp_code(img, 1, 1, LbpConfig{4, 1, false, false}) == 1u);
    }
    SUBCASE("diagonal sample that equals the center exactly counts as >=") {
        // Corners 159/111/111/63 around the k=1 sample blend to
        // 111 + 48 (1 - fx - fy) = 111, which floating point may round down.
        GrayImage img(3, 3, 255);
        img(1, 1) = 111;
        img(0, 1) = 159;
        img(0, 2) = 111;
        img(1, 2) = 63;
        const LbpConfig cfg{8, 1, false, false};
        CHECK(sample_neighbor(img, 1, 1, 1, cfg) == doctest::Approx(111.0).epsilon(1e-12));
        CHECK((lbp_code(img, 1, 1, cfg) & 2u) == 2u);
    }
}

TEST_CASE("uniform_mapping") {
    SUBCASE("p=8 has 59 bins; exhaustive transition check over 256 codes") {
        const UniformMapping m(8);
        CHECK(m.bins() == 59);
        int uniform = 0;
        for (std::uint32_t c = 0; c < 256; ++c) {
            const int t = oracle::circular_transitions(c, 8);
            CHECK(UniformMapping::transitions(c, 8) == t);
            if (t <= 2) {
                ++uniform;
                CHECK(m.bin(c) < m.nonuniform_bin());
            } else {
                CHECK(m.bin(c) == m.nonuniform_bin());
            }
        }
        CHECK(uniform == 58);
    }
    SUBCASE("0 and all-ones are uniform; alternating pattern is not") {
        for (int p : {4, 8, 12, 16, 20, 24}) {
            const UniformMapping m(p);
            CHECK(m.bins() == static_cast<std::size_t>(p * (p - 1) + 3));
            CHECK(m.bin(0) != m.nonuniform_bin());
            CHECK(m.bin((1u << p) - 1u) != m.nonuniform_bin());
        }
        CHECK(UniformMapping(8).bin(0b01010101u) == 58u);
    }
    SUBCASE("table is total and surjective and matches the reference scan") {
        for (int p : {4, 8, 12, 16}) {
            const auto table = UniformMapping(p).table();
            const auto ref = oracle::uniform_table(p);
            CHECK(table == ref);
            std::set<std::uint32_t> image(table.begin(), table.end());
            CHECK(image.size() == static_cast<std::size_t>(p * (p - 1) + 3));
            CHECK(*image.rbegin() == static_cast<std::uint32_t>(p * (p - 1) + 2));
        }
    }
    SUBCASE("p=24 uses the sparse path; spot check against transitions") {
        const UniformMapping m(24);
        std::mt19937_64 rng(11);
        std::set<std::uint32_t> seen;
        for (int i = 0; i < 20000; ++i) {
            const std::uint32_t c = static_cast<std::uint32_t>(rng()) & 0xFFFFFFu;
            const bool uniform = oracle::circular_transitions(c, 24) <= 2;
            CHECK((m.bin(c) != m.nonuniform_bin()) == uniform);
        }
        // every uniform code gets a distinct bin
        for (int len = 1; len < 24; ++len)
            for (int rot = 0; rot < 24; ++rot) {
                const std::uint32_t run = (1u << len) - 1u;
                seen.insert(m.bin(((run << rot) | (run >> (24 - rot))) & 0xFFFFFFu));
            }
        CHECK(seen.size() == 24 * 23);
    }
}

TEST_CASE("lbp_histogram") {
    SUBCASE("flat 10x10 image: 64 centers all in bin 255") {
        GrayImage img(10, 10, 9);
        const auto h = lbp_histogram(img, LbpConfig{8, 1, false, false});
        REQUIRE(h.bins.size() == 256);
        CHECK(h.bins[255] == 64.0);
        CHECK(std::accumulate(h.bins.begin(), h.bins.end(), 0.0) == 64.0);
    }
    SUBCASE("normalized histograms sum to 1") {
        std::mt19937_64 rng(5);
        for (int p : {4, 8, 16, 24}) {
            const auto img = testutil::random_gray(20, 17, rng);
            const auto h = lbp_histogram(img, LbpConfig{p, 2, true, true});
            CHECK(std::accumulate(h.bins.begin(), h.bins.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    SUBCASE("two-tone vertical split matches the reference") {
        GrayImage img(12, 12, 40);
        for (int y = 0; y < 12; ++y)
            for (int x = 6; x < 12; ++x) img(x, y) = 200;
        for (int p : {4, 8}) {
            const auto h = lbp_histogram(img, LbpConfig{p, 1, false, false});
            CHECK(h.bins == oracle::histogram(img, p, 1, false));
            std::size_t nonzero = 0;
            for (double b : h.bins) nonzero += b > 0.0;
            CHECK(nonzero <= 4);
        }
    }
    SUBCASE("image too small") {
        GrayImage img(4, 9, 0);
        CHECK_THROWS_AS(lbp_histogram(img, LbpConfig{8, 2, false, false}), std::invalid_argument);
        CHECK_NOTHROW(lbp_histogram(GrayImage(3, 3, 0), LbpConfig{8, 1, false, false}));
    }
}

TEST_CASE("lbp_histogram equals the per-pixel reference on random images") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        const auto img = testutil::random_gray(16 + trial, 14, rng);
        for (int p : {4, 8, 12})
            for (int r : {1, 2, 3})
                for (bool uniform : {false, true}) {
                    const auto h = lbp_histogram(img, LbpConfig{p, r, uniform, false});
                    CHECK(h.bins == oracle::histogram(img, p, r, uniform));
                }
    }
}

TEST_CASE("LBP codes are invariant to intensity shift and positive power-of-two scaling") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto img = testutil::random_real(11, 11, rng);
        RealImage shifted = img, scaled = img;
        for (auto& v : shifted.pixels()) v += 37.5;
        for (auto& v : scaled.pixels()) v *= 4.0;
        for (int p : {4, 8, 12}) {
            const LbpConfig cfg{p, 2, false, false};
            for (int y = 2; y < 9; ++y)
                for (int x = 2; x < 9; ++x) {
                    const auto code = lbp_code(img, x, y, cfg);
                    CHECK(lbp_code(shifted, x, y, cfg) == code);
                    CHECK(lbp_code(scaled, x, y, cfg) == code);
                }
        }
    }
}

TEST_CASE("lbp_bin_map agrees with lbp_code") {
    std::mt19937_64 rng(8);
    const auto img = testutil::random_gray(13, 10, rng);
    const LbpConfig cfg{8, 1, true, false};
    const auto map = lbp_bin_map(img, cfg);
    const UniformMapping m(8);
    for (int y = 1; y < 9; ++y)
        for (int x = 1; x < 12; ++x) CHECK(map(x, y) == m.bin(lbp_code(img, x, y, cfg)));
}
