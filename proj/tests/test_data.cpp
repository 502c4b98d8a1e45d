#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "berlin/data.hpp"
#include "support/fixtures.hpp"

using namespace berlin;
using namespace berlin::data;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

}  // namespace

TEST_CASE("IDX round-trip is lossless for u8 sources") {
    const auto dir = fixtures::temp_dir("idx");
    const auto ds = fixtures::blob_images(10, 120, 28, 0.2, 42);
    save_idx(ds, dir + "/img", dir + "/lab");
    // First load quantizes to u8; the second round-trip must be exact.
    const auto once = load_idx(dir + "/img", dir + "/lab", 0);
    save_idx(once, dir + "/img2", dir + "/lab2");
    const auto twice = load_idx(dir + "/img2", dir + "/lab2", 0);
    REQUIRE(once.size() == 120);
    CHECK(once.dim() == 784);
    CHECK(once.class_count == 10);
    CHECK(once.features == twice.features);
    CHECK(once.labels == twice.labels);
}

TEST_CASE("IDX pixel scaling endpoints") {
    const auto dir = fixtures::temp_dir("idx_scale");
    Dataset ds;
    ds.name = "endpoints";
    ds.class_count = 2;
    ds.rows = ds.cols = 1;
    ds.features = {{0.0}, {1.0}};
    ds.labels = {0, 1};
    save_idx(ds, dir + "/img", dir + "/lab");
    const auto back = load_idx(dir + "/img", dir + "/lab", 0);
    CHECK(back.features[0][0] == 0.0);
    CHECK(back.features[1][0] == 1.0);
}

TEST_CASE("IDX limit keeps the first samples in file order") {
    const auto dir = fixtures::temp_dir("idx_limit");
    const auto ds = fixtures::blob_images(5, 50, 4, 0.1, 7);
    save_idx(ds, dir + "/img", dir + "/lab");
    const auto full = load_idx(dir + "/img", dir + "/lab", 0);
    const auto part = load_idx(dir + "/img", dir + "/lab", 20);
    REQUIRE(part.size() == 20);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(part.features[i] == full.features[i]);
        CHECK(part.labels[i] == full.labels[i]);
    }
}

TEST_CASE("IDX format errors") {
    const auto dir = fixtures::temp_dir("idx_err");
    const auto ds = fixtures::blob_images(3, 9, 4, 0.1, 1);
    save_idx(ds, dir + "/img", dir + "/lab");

    SUBCASE("swapped files: wrong magic named in the error") {
        try {
            load_idx(dir + "/lab", dir + "/img", 0);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(std::string(e.what()).find("0x00000803") != std::string::npos);
        }
    }
    SUBCASE("truncated image payload") {
        std::ifstream in(dir + "/img", std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        bytes.resize(bytes.size() - 10);
        write_file(dir + "/img_trunc", bytes);
        CHECK_THROWS_AS(load_idx(dir + "/img_trunc", dir + "/lab", 0), FormatError);
    }
    SUBCASE("count mismatch between image and label files") {
        const auto small = fixtures::blob_images(3, 6, 4, 0.1, 1);
        save_idx(small, dir + "/img6", dir + "/lab6");
        CHECK_THROWS_AS(load_idx(dir + "/img", dir + "/lab6", 0), DataError);
    }
}

TEST_CASE("CSV loader: shape, scaling, label ids") {
    const auto dir = fixtures::temp_dir("csv");
    write_file(dir + "/d.csv",
               "a,b,label,c\n"
               "1,10,cat,5\n"
               "3,10,dog,7\n"
               "2,10,cat,6\n");
    const auto ds = load_labelled_csv(dir + "/d.csv", "label", 0);
    REQUIRE(ds.size() == 3);
    CHECK(ds.dim() == 3);
    CHECK(ds.class_count == 2);
    // first-appearance order: cat -> 0, dog -> 1
    CHECK(ds.labels == std::vector<std::int64_t>{0, 1, 0});
    // min-max per column; constant column b maps to 0
    CHECK(ds.features[0] == berlin::linalg::Vector{0.0, 0.0, 0.0});
    CHECK(ds.features[1] == berlin::linalg::Vector{1.0, 0.0, 1.0});
    CHECK(ds.features[2] == berlin::linalg::Vector{0.5, 0.0, 0.5});
}

TEST_CASE("CSV loader: single data row maps to all zeros") {
    const auto dir = fixtures::temp_dir("csv1");
    write_file(dir + "/d.csv", "x,y,label\n4.5,-2,a\n");
    const auto ds = load_labelled_csv(dir + "/d.csv", "label", 0);
    REQUIRE(ds.size() == 1);
    CHECK(ds.features[0] == berlin::linalg::Vector{0.0, 0.0});
}

TEST_CASE("CSV loader errors") {
    const auto dir = fixtures::temp_dir("csv_err");
    write_file(dir + "/head.csv", "x,y,label\n");
    CHECK_THROWS_AS(load_labelled_csv(dir + "/head.csv", "label", 0), DataError);

    write_file(dir + "/nolabel.csv", "x,y\n1,2\n");
    CHECK_THROWS_AS(load_labelled_csv(dir + "/nolabel.csv", "label", 0), ConfigError);

    write_file(dir + "/bad.csv", "x,label\n1,a\noops,b\n");
    try {
        load_labelled_csv(dir + "/bad.csv", "label", 0);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
}

TEST_CASE("pool_downsample") {
    auto ds = fixtures::blob_images(3, 12, 28, 0.2, 9);
    const auto pooled = pool_downsample(ds, 2);
    CHECK(pooled.dim() == 196);
    CHECK(pooled.labels == ds.labels);

    SUBCASE("constant image stays constant") {
        Dataset c;
        c.name = "const";
        c.class_count = 1;
        c.rows = c.cols = 4;
        c.features = {berlin::linalg::Vector(16, 0.375)};
        c.labels = {0};
        const auto p = pool_downsample(c, 2);
        for (const double v : p.features[0]) CHECK(v == 0.375);
    }
    SUBCASE("factor 1 is the identity") {
        const auto same = pool_downsample(ds, 1);
        CHECK(same.features == ds.features);
    }
    SUBCASE("invalid geometry") {
        CHECK_THROWS_AS(pool_downsample(ds, 3), DimensionError);  // 28 % 3 != 0
        Dataset odd;
        odd.name = "odd";
        odd.class_count = 1;
        odd.features = {berlin::linalg::Vector(10, 0.0)};
        odd.labels = {0};
        CHECK_THROWS_AS(pool_downsample(odd, 2), DimensionError);  // not square
    }
}

TEST_CASE("stretch_concat") {
    const auto ma = fixtures::blob_vectors(10, 30, 784, 4.0, 1.0, 3);
    const auto wb = fixtures::blob_vectors(3, 20, 93, 4.0, 1.0, 4);
    const auto [ea, eb] = stretch_concat(ma, wb);
    CHECK(ea.dim() == 877);
    CHECK(eb.dim() == 877);
    CHECK(ea.class_count == 13);
    CHECK(eb.class_count == 13);
    // domain-A trailing coordinates are zero; originals preserved bitwise
    for (std::size_t j = 0; j < 784; ++j) CHECK(ea.features[5][j] == ma.features[5][j]);
    for (std::size_t j = 784; j < 877; ++j) CHECK(ea.features[5][j] == 0.0);
    // domain-B leading zeros, label offset by 10
    for (std::size_t j = 0; j < 784; ++j) CHECK(eb.features[7][j] == 0.0);
    for (std::size_t j = 0; j < 93; ++j) CHECK(eb.features[7][784 + j] == wb.features[7][j]);
    CHECK(eb.labels[7] == wb.labels[7] + 10);
}

TEST_CASE("validate rejects inconsistent datasets") {
    Dataset ds;
    ds.name = "bad";
    ds.class_count = 2;
    ds.features = {{1.0, 2.0}};
    ds.labels = {0, 1};
    CHECK_THROWS_AS(ds.validate(), DataError);
    ds.labels = {5};
    CHECK_THROWS_AS(ds.validate(), DataError);
    ds.labels = {1};
    CHECK_NOTHROW(ds.validate());
}
