#include <doctest.h>

#include <cstring>
#include <fstream>
#include <random>

#include "kpath/binary_io.hpp"
#include "kpath/eval.hpp"
#include "kpath/feature_file.hpp"
#include "test_util.hpp"

using namespace kpath;

namespace {

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
    std::ofstream os(p, std::ios::binary);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Header assembled by hand, independent of LeWriter.
std::vector<unsigned char> header(std::uint16_t version, std::uint32_t count, std::uint32_t dim) {
    std::vector<unsigned char> b{'K', 'P', 'F', 'T'};
    b.push_back(static_cast<unsigned char>(version & 0xFF));
    b.push_back(static_cast<unsigned char>(version >> 8));
    for (std::uint32_t v : {count, dim})
        for (int s = 0; s < 32; s += 8) b.push_back(static_cast<unsigned char>((v >> s) & 0xFF));
    return b;
}

void push_f32(std::vector<unsigned char>& b, float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    for (int s = 0; s < 32; s += 8) b.push_back(static_cast<unsigned char>((u >> s) & 0xFF));
}

FeatureSet sample_set(std::size_t n, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> nd(0.0f, 1.0f);
    FeatureSet s;
    for (std::size_t i = 0; i < n; ++i) {
        s.ids.push_back("img" + std::to_string(i));
        s.labels.push_back(static_cast<int>(i % 3));
        FeatureVector v(dim);
        for (double& x : v) x = nd(rng);
        s.vectors.push_back(v);
    }
    return s;
}

}  // namespace

TEST_CASE("feature file round trip") {
    testutil::TempDir dir("kpft");
    const auto s = sample_set(12, 7, 1);
    write_feature_set(dir / "f.kpft", s);
    CHECK(std::filesystem::exists(dir / "f.kpft.labels"));
    CHECK(std::filesystem::file_size(dir / "f.kpft") == 14 + 12 * 7 * 4);
    const auto back = read_feature_set(dir / "f.kpft");
    CHECK(back.count() == 12);
    CHECK(back.dim() == 7);
    CHECK(back.ids == s.ids);
    CHECK(back.labels == s.labels);
    CHECK(back.vectors == s.vectors);  // values were f32 to begin with
    CHECK(back.label_names.empty());

    SUBCASE("header-only file") {
        write_feature_set(dir / "empty.kpft", FeatureSet{});
        const auto e = read_feature_set(dir / "empty.kpft");
        CHECK(e.count() == 0);
    }
    SUBCASE("string labels map to sorted names") {
        FeatureSet t = s;
        t.label_names = {"muscle", "stroma", "tumor"};
        write_feature_set(dir / "named.kpft", t);
        const auto n = read_feature_set(dir / "named.kpft");
        CHECK(n.label_names == t.label_names);
        CHECK(n.labels == t.labels);
    }
}

TEST_CASE("hand-built body parses to the exact values") {
    testutil::TempDir dir("kpft-hand");
    auto b = header(1, 2, 3);
    for (float f : {-1.5f, 0.0f, 3.25f, 1e-7f, -0.0f, 65504.0f}) push_f32(b, f);
    write_bytes(dir / "h.kpft", b);
    const auto v = read_feature_body(dir / "h.kpft");
    REQUIRE(v.size() == 2);
    CHECK(v[0] == FeatureVector{-1.5, 0.0, 3.25});
    CHECK(v[1][0] == static_cast<double>(1e-7f));
    CHECK(v[1][2] == 65504.0);
}

TEST_CASE("malformed feature files report a byte offset") {
    testutil::TempDir dir("kpft-bad");
    auto offset_of = [&](const std::vector<unsigned char>& bytes) -> std::size_t {
        write_bytes(dir / "x.kpft", bytes);
        try {
            read_feature_body(dir / "x.kpft");
        } catch (const ParseError& e) {
            return e.offset();
        }
        FAIL("expected ParseError");
        return 0;
    };
    CHECK(offset_of({'K', 'P', 'X', 'T', 1, 0}) == 0);
    CHECK(offset_of(header(2, 0, 0)) == 4);
    CHECK(offset_of({'K', 'P', 'F', 'T', 1, 0, 1}) == 6);
    auto truncated = header(1, 2, 2);
    push_f32(truncated, 1.0f);
    push_f32(truncated, 2.0f);
    push_f32(truncated, 3.0f);
    CHECK(offset_of(truncated) == 14 + 12);
    auto trailing = header(1, 1, 1);
    push_f32(trailing, 1.0f);
    trailing.push_back(0);
    CHECK(offset_of(trailing) == 18);
}

TEST_CASE("labels sidecar") {
    testutil::TempDir dir("kpft-labels");
    const auto s = sample_set(3, 2, 2);
    write_feature_set(dir / "f.kpft", s);

    SUBCASE("falls back to <stem>.labels") {
        std::filesystem::rename(dir / "f.kpft.labels", dir / "f.labels");
        CHECK(default_labels_path(dir / "f.kpft") == dir / "f.labels");
        CHECK(read_feature_set(dir / "f.kpft").labels == s.labels);
    }
    SUBCASE("explicit path wins") {
        std::ofstream(dir / "other.txt") << "a,2\nb,2\nc,0\n";
        CHECK(read_feature_set(dir / "f.kpft", dir / "other.txt").labels == std::vector<int>{2, 2, 0});
    }
    SUBCASE("count mismatch") {
        std::ofstream(dir / "f.kpft.labels") << "a,1\nb,2\n";
        CHECK_THROWS_AS(read_feature_set(dir / "f.kpft"), ParseError);
    }
    SUBCASE("duplicate ids") {
        std::ofstream(dir / "f.kpft.labels") << "a,1\nb,2\na,0\n";
        try {
            read_feature_set(dir / "f.kpft");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.offset() == 8);
        }
    }
    SUBCASE("malformed line") {
        std::ofstream(dir / "f.kpft.labels") << "a,1\nnocomma\nc,0\n";
        CHECK_THROWS_AS(read_feature_set(dir / "f.kpft"), ParseError);
    }
    SUBCASE("missing sidecar") {
        std::filesystem::remove(dir / "f.kpft.labels");
        CHECK_THROWS_AS(read_feature_set(dir / "f.kpft"), std::runtime_error);
    }
}

TEST_CASE("eval_feature_file") {
    testutil::TempDir dir("kpft-eval");
    auto s = sample_set(20, 16, 3);
    FeatureSet twice;
    for (std::size_t i = 0; i < s.count(); ++i)
        for (int rep = 0; rep < 2; ++rep) {
            twice.ids.push_back(s.ids[i] + "_" + std::to_string(rep));
            twice.labels.push_back(s.labels[i]);
            twice.vectors.push_back(s.vectors[i]);
        }
    write_feature_set(dir / "twice.kpft", twice);
    // signed values, so only the chi2 variant that tolerates sign is guaranteed exact here
    for (auto m : {MetricKind::L1, MetricKind::L2, MetricKind::Cosine, MetricKind::Chi2Abs})
        CHECK(eval_feature_file(dir / "twice.kpft", m).accuracy == 1.0);
}
