#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <limits>
#include <random>

#include "lfpp/field.hpp"
#include "lfpp/io.hpp"
#include "oracles.hpp"

using namespace lfpp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "lfpp_test_io";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(FieldFile, RoundTripIsBitExact) {
    for (auto topo : {Topology::torus, Topology::zero_boundary}) {
        auto f = sample_dgff(32, 1.0 / 32, -77, topo);
        for (const auto& g : {f, heat_mollify(f, 0.1)}) {
            const std::string bytes = encode_field(g);
            const auto back = decode_field(bytes);
            EXPECT_EQ(back, g);
            EXPECT_EQ(encode_field(back), bytes);
            EXPECT_EQ(std::memcmp(back.values().data(), g.values().data(), g.values().size() * 8), 0);
        }
    }
    const auto f = sample_dgff(16, 0.5, 3);
    save_field(f, scratch("f.lfp"));
    EXPECT_EQ(load_field(scratch("f.lfp")), f);
}

TEST(FieldFile, HeaderLayout) {
    const ScalarField2D f(8, 0.125, std::vector<double>(64, 1.5), FieldKind::custom, 5, Topology::zero_boundary);
    const std::string b = encode_field(f);
    ASSERT_EQ(b.size(), 4u + 4 + 4 + 8 + 1 + 8 + 64 * 8);
    EXPECT_EQ(b.substr(0, 4), "LFP1");
    EXPECT_EQ(static_cast<unsigned char>(b[4]), 1u);  // little-endian version
    EXPECT_EQ(static_cast<unsigned char>(b[8]), 8u);
    EXPECT_EQ(static_cast<unsigned char>(b[20]), 0x82u);
}

TEST(FieldFile, RejectsCorruptInput) {
    std::string b = encode_field(sample_dgff(8, 0.125, 1));
    EXPECT_THROW(decode_field(b.substr(0, b.size() - 1)), IoError);
    std::string bad = b;
    bad[0] = 'X';
    EXPECT_THROW(decode_field(bad), IoError);
    EXPECT_THROW(decode_field(b + "x"), IoError);
    EXPECT_THROW(load_field(scratch("missing.lfp")), IoError);
}

TEST(DistanceFile, RoundTripIsBitExact) {
    const int n = 24;
    const auto w = WeightField::from_weights(n, 1.0 / n, oracle::random_field(n, 4, 0.5, 2.0));
    const std::vector<Cell> src{{3, 4}, {20, 1}};
    const auto d = shortest_distances(w, src);
    const auto back = decode_distances(encode_distances(d));
    EXPECT_EQ(back.n, d.n);
    EXPECT_EQ(back.spacing, d.spacing);
    EXPECT_EQ(back.sources, d.sources);
    EXPECT_EQ(back.dist, d.dist);
    EXPECT_EQ(back.pred, d.pred);
    save_distances(d, scratch("d.lfd"));
    EXPECT_EQ(encode_distances(load_distances(scratch("d.lfd"))), encode_distances(d));
}

TEST(DistanceFile, KeepsInfinityAndMissingPredecessors) {
    DistanceField d;
    d.n = 2;
    d.spacing = 0.5;
    d.sources = {{0, 0}};
    d.dist = {0.0, 0.25, std::numeric_limits<double>::infinity(), 1.0};
    d.pred = {kNoPredecessor, 0, kNoPredecessor, 1};
    const auto back = decode_distances(encode_distances(d));
    EXPECT_EQ(back.dist, d.dist);
    EXPECT_EQ(back.pred, d.pred);
}

TEST(MaskFile, RoundTripAndRunLengths) {
    std::mt19937_64 rng(2);
    for (int n : {1, 5, 64}) {
        RegionMask m = RegionMask::empty(n);
        for (auto& b : m.bits) b = rng() % 3 == 0;
        const auto back = decode_mask(encode_mask(m));
        EXPECT_TRUE(back.same_cells(m));
    }
    RegionMask full = RegionMask::full(4);
    const std::string b = encode_mask(full);
    // magic, n, a zero-length run of zeros, then 16 ones
    ASSERT_EQ(b.size(), 16u);
    EXPECT_EQ(static_cast<unsigned char>(b[8]), 0u);
    EXPECT_EQ(static_cast<unsigned char>(b[12]), 16u);
    EXPECT_TRUE(decode_mask(b).same_cells(full));
    save_mask(full, scratch("m.lfm"));
    EXPECT_TRUE(load_mask(scratch("m.lfm")).same_cells(full));
    EXPECT_THROW(decode_mask(b.substr(0, 12)), IoError);
}

TEST(Pgm, HeaderAndPixels) {
    RegionMask m = RegionMask::empty(3);
    m.set({1, 2});
    save_mask_pgm(m, scratch("m.pgm"));
    const std::string b = detail::read_file(scratch("m.pgm"));
    ASSERT_EQ(b.size(), std::string("P5\n3 3\n255\n").size() + 9);
    EXPECT_EQ(b.substr(0, 11), "P5\n3 3\n255\n");
    EXPECT_EQ(static_cast<unsigned char>(b[11 + 5]), 255u);
    EXPECT_EQ(static_cast<unsigned char>(b[11]), 0u);
    save_overlay_pgm(m, {{{0, 0}, {0, 1}}}, scratch("o.pgm"));
    const std::string o = detail::read_file(scratch("o.pgm"));
    EXPECT_EQ(static_cast<unsigned char>(o[11]), 255u);
    EXPECT_EQ(static_cast<unsigned char>(o[11 + 5]), 96u);
}

TEST(Csv, ShortestRoundTripDoubles) {
    for (double v : {0.1, 1.0 / 3.0, 2.0, -1e-300, 123456.789, 5e-324, 1.7976931348623157e308}) {
        const std::string s = format_double(v);
        EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
    }
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(2.0), "2");
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
    CsvWriter csv({"a", "b", "c"});
    csv.row(1, 0.5, std::string("x"));
    csv.row(std::size_t{7}, -2.25, "y");
    EXPECT_EQ(csv.str(), "a,b,c\n1,0.5,x\n7,-2.25,y\n");
}

TEST(Csv, LoopAndTreeFiles) {
    BoundaryLoop loop;
    loop.cells = {{1, 2}, {1, 3}};
    save_loop_csv(loop, scratch("loop.csv"));
    EXPECT_EQ(detail::read_file(scratch("loop.csv")), "index,row,col\n0,1,2\n1,1,3\n");
    GeodesicTree tree;
    tree.parent = {{index_of(4, {1, 1}), index_of(4, {0, 0})}};
    save_tree_csv(tree, 4, scratch("tree.csv"));
    EXPECT_EQ(detail::read_file(scratch("tree.csv")), "parent_row,parent_col,child_row,child_col\n0,0,1,1\n");
}

TEST(Files, WriteCreatesParentDirectories) {
    const fs::path p = scratch("nested/deeper/file.bin");
    fs::remove_all(scratch("nested"));
    detail::write_file(p, std::string("abc\0def", 7));
    EXPECT_EQ(detail::read_file(p), std::string("abc\0def", 7));
}
