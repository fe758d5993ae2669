#include <doctest.h>

#include <fstream>

#include "kpath/dataset.hpp"
#include "kpath/image_io.hpp"
#include "kpath/parallel.hpp"
#include "test_util.hpp"

using namespace kpath;

namespace {
RgbImage solid(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return {GrayImage(w, h, r), GrayImage(w, h, g), GrayImage(w, h, b)};
}
}  // namespace

TEST_CASE("to_grayscale") {
    CHECK(to_grayscale(GrayImage(4, 3, 128), GrayImage(4, 3, 128), GrayImage(4, 3, 128)) == GrayImage(4, 3, 128));
    CHECK(to_grayscale(GrayImage(2, 2, 255), GrayImage(2, 2, 255), GrayImage(2, 2, 255))(1, 1) == 255);
    CHECK(to_grayscale(GrayImage(1, 1, 255), GrayImage(1, 1, 0), GrayImage(1, 1, 0))(0, 0) == 76);
    CHECK(to_grayscale(GrayImage(1, 1, 0), GrayImage(1, 1, 255), GrayImage(1, 1, 0))(0, 0) == 150);  // 149.685
    CHECK(to_grayscale(GrayImage(1, 1, 0), GrayImage(1, 1, 0), GrayImage(1, 1, 255))(0, 0) == 29);   // 29.07
    CHECK_THROWS_AS(to_grayscale(GrayImage(2, 2), GrayImage(2, 3), GrayImage(2, 2)), std::invalid_argument);

    SUBCASE("equal channels are a fixed point for every value") {
        for (int v = 0; v < 256; ++v) {
            const GrayImage c(1, 1, static_cast<std::uint8_t>(v));
            CHECK(to_grayscale(c, c, c)(0, 0) == v);
        }
    }
}

TEST_CASE("class_from_filename") {
    CHECK(class_from_filename("A_01") == "A");
    CHECK(class_from_filename("Tissue_12") == "Tissue");
    CHECK(class_from_filename("A12") == "A");
    CHECK(class_from_filename("T1") == "T");
    CHECK(class_from_filename("noindex").empty());
}

TEST_CASE("load_dataset") {
    testutil::TempDir dir("load");

    SUBCASE("empty directory") {
        CHECK_THROWS_WITH_AS(load_dataset(dir.path()), doctest::Contains("no images found"), std::runtime_error);
    }
    SUBCASE("single 308x168 TIF") {
        write_tiff(dir / "A_01.tif", solid(308, 168, 255, 0, 0));
        const auto ds = load_dataset(dir.path());
        REQUIRE(ds.size() == 1);
        CHECK(ds.class_names == std::vector<std::string>{"A"});
        CHECK(ds.images[0].id == "A_01");
        CHECK(ds.images[0].class_label == 0);
        CHECK(ds.images[0].pixels.width() == 308);
        CHECK(ds.images[0].pixels.height() == 168);
        CHECK(ds.images[0].pixels(100, 100) == 76);
    }
    SUBCASE("ordering, labels and PNG in non-strict mode") {
        write_png(dir / "B_02.png", GrayImage(5, 5, 20));
        write_tiff(dir / "B_01.tif", solid(5, 5, 10, 10, 10));
        write_tiff(dir / "A_01.tif", solid(6, 4, 30, 30, 30));
        std::ofstream(dir / "notes.txt") << "ignored";
        const auto ds = load_dataset(dir.path());
        REQUIRE(ds.size() == 3);
        CHECK(ds.images[0].id == "A_01");
        CHECK(ds.images[1].id == "B_01");
        CHECK(ds.images[2].id == "B_02");
        CHECK(ds.labels() == std::vector<int>{0, 1, 1});
        CHECK(ds.images[2].pixels(0, 0) == 20);

        CHECK_THROWS_AS(load_dataset(dir.path(), LoadOptions{true}), ValidationError);
    }
    SUBCASE("subdirectory per class") {
        std::filesystem::create_directories(dir / "stroma");
        std::filesystem::create_directories(dir / "muscle");
        write_png(dir / "stroma" / "x.png", GrayImage(4, 4, 1));
        write_png(dir / "muscle" / "y.png", GrayImage(4, 4, 2));
        const auto ds = load_dataset(dir.path());
        CHECK(ds.class_names == std::vector<std::string>{"muscle", "stroma"});
        CHECK(ds.images[0].pixels(0, 0) == 2);
        CHECK(ds.images[1].class_label == 1);
    }
    SUBCASE("unreadable file is named in the error") {
        std::ofstream(dir / "C_01.tif") << "not a tiff";
        CHECK_THROWS_WITH(load_dataset(dir.path()), doctest::Contains("C_01.tif"));
    }
    SUBCASE("images smaller than 3x3 are rejected") {
        write_png(dir / "A_01.png", GrayImage(2, 5, 0));
        CHECK_THROWS(load_dataset(dir.path()));
    }
    SUBCASE("strict mode accepts a 20x48 corpus and rejects a short class") {
        for (int c = 0; c < 20; ++c)
            for (int i = 1; i <= 48; ++i) {
                if (c == 19 && i == 48) continue;
                write_tiff(dir / (std::string(1, static_cast<char>('A' + c)) + "_" + std::to_string(i) + ".tif"),
                           solid(4, 4, static_cast<std::uint8_t>(c), 0, 0));
            }
        CHECK_THROWS_WITH_AS(load_dataset(dir.path(), LoadOptions{true}), doctest::Contains("class T has 47"),
                             ValidationError);
        write_tiff(dir / "T_48.tif", solid(4, 4, 19, 0, 0));
        const auto ds = load_dataset(dir.path(), LoadOptions{true});
        CHECK(ds.size() == 960);
        CHECK(ds.num_classes() == 20);
        for (auto n : ds.class_counts()) CHECK(n == 48);

        set_thread_count(1);
        const auto serial = load_dataset(dir.path(), LoadOptions{true});
        set_thread_count(0);
        for (std::size_t i = 0; i < ds.size(); ++i) {
            CHECK(serial.images[i].id == ds.images[i].id);
            CHECK(serial.images[i].pixels == ds.images[i].pixels);
        }
    }
}

TEST_CASE("generate_synthetic") {
    const auto a = generate_synthetic({2, 4, 64, 64, 7});
    const auto b = generate_synthetic({2, 4, 64, 64, 7});
    REQUIRE(a.size() == 8);
    CHECK(a.num_classes() == 2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.images[i].id == b.images[i].id);
        CHECK(a.images[i].pixels == b.images[i].pixels);
        CHECK(a.images[i].pixels.width() == 64);
    }
    const auto c = generate_synthetic({2, 4, 64, 64, 8});
    CHECK(c.labels() == a.labels());
    CHECK(c.images[0].pixels != a.images[0].pixels);

    const auto big = generate_synthetic({20, 48, 168, 168, 1});
    CHECK(big.size() == 960);
    for (auto n : big.class_counts()) CHECK(n == 48);

    CHECK_THROWS_AS(generate_synthetic({1, 4, 64, 64, 1}), std::invalid_argument);
    CHECK_THROWS_AS(generate_synthetic({3, 1, 64, 64, 1}), std::invalid_argument);
}

TEST_CASE("synthetic corpus round-trips through PNG") {
    testutil::TempDir dir("synth");
    const auto ds = generate_synthetic({3, 2, 20, 16, 5});
    write_dataset_png(ds, dir.path());
    const auto back = load_dataset(dir.path());
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.images[i].id == ds.images[i].id);
        CHECK(back.images[i].class_label == ds.images[i].class_label);
        CHECK(back.images[i].pixels == ds.images[i].pixels);
    }
}
