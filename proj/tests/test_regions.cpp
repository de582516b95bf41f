#include "nuctrack/regions.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nuctrack;

TEST(LabelComponents, EmptyMask)
{
    const auto lab = label_components(BinaryMask(8, 6));
    EXPECT_TRUE(lab.regions.empty());
    for (auto v : lab.map.labels()) EXPECT_EQ(v, 0);
}

TEST(LabelComponents, SinglePixel)
{
    BinaryMask m(10, 10);
    m.set(3, 7);
    const auto lab = label_components(m);
    ASSERT_EQ(lab.regions.size(), 1u);
    const Region& r = lab.regions[0];
    EXPECT_EQ(r.label, 1);
    EXPECT_EQ(r.area, 1);
    EXPECT_DOUBLE_EQ(r.centroid.x, 3.0);
    EXPECT_DOUBLE_EQ(r.centroid.y, 7.0);
    EXPECT_EQ(r.bbox, (BBox{3, 7, 3, 7}));
    EXPECT_EQ(lab.map(3, 7), 1);
}

TEST(LabelComponents, DiagonalNeighborsDependOnConnectivity)
{
    BinaryMask m(4, 4);
    m.set(1, 1);
    m.set(2, 2);
    EXPECT_EQ(label_components(m, Connectivity::Eight).regions.size(), 1u);
    EXPECT_EQ(label_components(m, Connectivity::Four).regions.size(), 2u);
}

TEST(LabelComponents, LabelsFollowRasterOrderOfFirstPixel)
{
    // A "U": the right arm starts on row 0, the left arm on row 1 gets its own
    // provisional label and only joins through the bottom bar.
    BinaryMask m(8, 5);
    m.set(6, 0);
    m.set(1, 1);
    for (int y = 0; y < 4; ++y) m.set(6, y);
    for (int x = 1; x <= 6; ++x) m.set(x, 4);
    m.set(1, 2);
    m.set(1, 3);
    // Plus an isolated pixel inside the U.
    BinaryMask n = m;
    n.set(3, 2);
    const auto lab = label_components(n);
    ASSERT_EQ(lab.regions.size(), 2u);
    EXPECT_EQ(lab.map(6, 0), 1);
    EXPECT_EQ(lab.map(1, 1), 1);
    EXPECT_EQ(lab.map(3, 2), 2);
}

TEST(LabelComponents, MatchesFloodFillOnRandomMasks)
{
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> density(0.1, 0.7);
    for (int trial = 0; trial < 200; ++trial) {
        const auto conn = trial % 3 == 0 ? Connectivity::Four : Connectivity::Eight;
        const auto m = oracle::random_mask(rng, 32, 32, density(rng));
        const auto lab = label_components(m, conn);
        const auto comps = oracle::flood_fill(m, conn);
        ASSERT_EQ(lab.regions.size(), comps.size());

        std::int64_t total = 0;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            const Region& r = lab.regions[i];
            const auto& c = comps[i];
            EXPECT_EQ(r.label, static_cast<int>(i + 1));
            EXPECT_EQ(r.area, c.area);
            EXPECT_NEAR(r.centroid.x, c.cx, 1e-12);
            EXPECT_NEAR(r.centroid.y, c.cy, 1e-12);
            EXPECT_EQ(r.bbox, (BBox{c.min_x, c.min_y, c.max_x, c.max_y}));
            EXPECT_TRUE(r.bbox.contains(r.centroid));
            for (auto [x, y] : c.pixels) EXPECT_EQ(lab.map(x, y), r.label);
            total += r.area;
        }
        // Partition: labeled pixels are exactly the foreground.
        EXPECT_EQ(total, static_cast<std::int64_t>(m.count()));
        for (int y = 0; y < 32; ++y)
            for (int x = 0; x < 32; ++x) EXPECT_EQ(lab.map(x, y) != 0, m(x, y));
        EXPECT_EQ(count_components(m, conn), comps.size());
    }
}

TEST(LabelComponents, WideMasksSpanningWords)
{
    std::mt19937 rng(4);
    for (int w : {63, 64, 65, 200}) {
        const auto m = oracle::random_mask(rng, w, 9, 0.5);
        EXPECT_EQ(label_components(m).regions.size(), oracle::flood_fill(m, Connectivity::Eight).size());
    }
}

TEST(LabelComponents, TranslationMovesGeometry)
{
    std::mt19937 rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = oracle::random_mask(rng, 20, 20, 0.3);
        const int dx = 7, dy = 4;
        BinaryMask moved(40, 40);
        for (int y = 0; y < 20; ++y)
            for (int x = 0; x < 20; ++x)
                if (m(x, y)) moved.set(x + dx, y + dy);
        const auto a = label_components(m).regions;
        const auto b = label_components(moved).regions;
        ASSERT_EQ(a.size(), b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_DOUBLE_EQ(b[i].centroid.x, a[i].centroid.x + dx);
            EXPECT_DOUBLE_EQ(b[i].centroid.y, a[i].centroid.y + dy);
            EXPECT_EQ(b[i].bbox, (BBox{a[i].bbox.min_x + dx, a[i].bbox.min_y + dy, a[i].bbox.max_x + dx,
                                       a[i].bbox.max_y + dy}));
        }
    }
}

TEST(CountComponents, AreaFilterMatchesFilterRegions)
{
    std::mt19937 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = oracle::random_mask(rng, 40, 30, 0.45);
        for (std::int64_t min_area : {0, 1, 2, 5, 20}) {
            EXPECT_EQ(count_components(m, Connectivity::Eight, min_area),
                      filter_regions(label_components(m).regions, min_area).size());
        }
    }
}

TEST(FilterRegions, KeepsLargeEnough)
{
    std::vector<Region> rs{{1, 1, {}, {}}, {2, 25, {}, {}}, {3, 400, {}, {}}};
    const auto out = filter_regions(rs, 20);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].area, 25);
    EXPECT_EQ(out[1].area, 400);
    EXPECT_EQ(filter_regions(rs, 0), rs);
    EXPECT_TRUE(filter_regions({}, 20).empty());
    EXPECT_THROW(filter_regions(rs, -1), InputError);
}
