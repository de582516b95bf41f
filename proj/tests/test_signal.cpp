#include "nuctrack/signal.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace nuctrack;

namespace {

BinaryMask blocks(int w, int h, std::initializer_list<BBox> boxes)
{
    BinaryMask m(w, h);
    for (const BBox& b : boxes)
        for (int y = b.min_y; y <= b.max_y; ++y)
            for (int x = b.min_x; x <= b.max_x; ++x) m.set(x, y);
    return m;
}

} // namespace

TEST(BuildMasks, SinglePixelNucleusGetsEightPixelRing)
{
    const auto fg = blocks(15, 15, {{7, 7, 7, 7}});
    const auto lab = label_components(fg);
    const auto m = build_masks(lab.map, lab.regions[0], 1, default_crop_pad(1), fg);
    EXPECT_EQ(m.nucleus.count(), 1u);
    EXPECT_EQ(m.cytoplasm.count(), 8u);
    EXPECT_EQ(m.crop, (BBox{4, 4, 10, 10}));
}

TEST(BuildMasks, FiveByFiveNucleusRing)
{
    const auto fg = blocks(30, 30, {{10, 10, 14, 14}});
    const auto lab = label_components(fg);
    const auto m = build_masks(lab.map, lab.regions[0], 1, 3, fg);
    // Oracle: dilate the nucleus once by brute force and remove it.
    auto ring = oracle::dilate(fg, StructuringElement::Square3x3);
    ring.subtract(fg);
    EXPECT_EQ(ring.count(), 24u);
    EXPECT_EQ(m.cytoplasm.count(), 24u);
    EXPECT_EQ(m.nucleus.count(), 25u);
    EXPECT_FALSE(m.nucleus.intersects(m.cytoplasm));
}

TEST(BuildMasks, NeighborNucleusIsCutFromRing)
{
    // Two 5x5 nuclei with a 2-pixel gap (columns 15 and 16 are background).
    const auto fg = blocks(40, 30, {{10, 10, 14, 14}, {17, 10, 21, 14}});
    const auto lab = label_components(fg);
    ASSERT_EQ(lab.regions.size(), 2u);
    const auto m = build_masks(lab.map, lab.regions[0], 2, 4, fg);

    // By hand: a 2-dilation of block A spans x 8..16, y 8..16. Minus A (25 px)
    // leaves 81 - 25 = 56; block B occupies x 17.. so it is outside the dilation,
    // but column 16 rows 10..14 is background and stays. The neighbor's pixels
    // would only appear for a wider ring, checked below with 3 dilations.
    EXPECT_EQ(m.cytoplasm.count(), 56u);
    const auto wide = build_masks(lab.map, lab.regions[0], 3, 5, fg);
    // 3-dilation spans x 7..17, y 7..17 (121 px); minus A (25) minus B's column x=17, y 10..14 (5).
    EXPECT_EQ(wide.cytoplasm.count(), 121u - 25u - 5u);
    for (int y = 0; y < wide.crop.height(); ++y) {
        for (int x = 0; x < wide.crop.width(); ++x) {
            if (wide.cytoplasm(x, y)) {
                EXPECT_EQ(lab.map(x + wide.crop.min_x, y + wide.crop.min_y), 0);
            }
        }
    }
}

TEST(BuildMasks, CropClampedAtFrameEdge)
{
    const auto fg = blocks(12, 12, {{0, 0, 2, 2}});
    const auto lab = label_components(fg);
    const auto m = build_masks(lab.map, lab.regions[0], 2, 4, fg);
    EXPECT_EQ(m.crop, (BBox{0, 0, 6, 6}));
    EXPECT_EQ(m.cytoplasm.count(), 25u - 9u);
}

TEST(BuildMasks, Preconditions)
{
    const auto fg = blocks(12, 12, {{4, 4, 5, 5}});
    const auto lab = label_components(fg);
    EXPECT_THROW(build_masks(lab.map, lab.regions[0], 0, 2, fg), InputError);
    EXPECT_THROW(build_masks(lab.map, lab.regions[0], 3, 2, fg), InputError);
    Region ghost = lab.regions[0];
    ghost.label = 9;
    EXPECT_THROW(build_masks(lab.map, ghost, 1, 3, fg), ConsistencyError);
    EXPECT_THROW(build_masks(lab.map, lab.regions[0], 1, 3, BinaryMask(5, 5)), DimensionError);
}

TEST(Measure, UniformFieldGivesZero)
{
    const auto fg = blocks(20, 20, {{8, 8, 11, 11}});
    const auto lab = label_components(fg);
    const auto masks = build_masks(lab.map, lab.regions[0], 2, 4, fg);
    const auto s = measure(GrayImage(20, 20, 77), masks);
    EXPECT_DOUBLE_EQ(s.nucleus_mean, 77.0);
    EXPECT_DOUBLE_EQ(s.cytoplasm_mean, 77.0);
    EXPECT_DOUBLE_EQ(s.signal_ratio, 0.0);
}

TEST(Measure, ConstructedLevelsAndShiftInvariance)
{
    const auto fg = blocks(20, 20, {{8, 8, 11, 11}});
    const auto lab = label_components(fg);
    const auto masks = build_masks(lab.map, lab.regions[0], 2, 4, fg);
    GrayImage green(20, 20, 50);
    for (int y = 8; y <= 11; ++y)
        for (int x = 8; x <= 11; ++x) green(x, y) = 200;
    const auto s = measure(green, masks);
    EXPECT_DOUBLE_EQ(s.signal_ratio, 150.0);
    EXPECT_DOUBLE_EQ(s.signal_ratio, s.nucleus_mean - s.cytoplasm_mean);

    for (auto& v : green.pixels()) v = static_cast<std::uint8_t>(v + 30);
    EXPECT_DOUBLE_EQ(measure(green, masks).signal_ratio, 150.0);
}

TEST(Measure, EmptyRingIsMeasurementError)
{
    // A nucleus filling the whole frame leaves no room for a ring.
    const auto fg = BinaryMask::filled(6, 6);
    const auto lab = label_components(fg);
    const auto masks = build_masks(lab.map, lab.regions[0], 1, 3, fg);
    EXPECT_TRUE(masks.cytoplasm.none());
    EXPECT_THROW(measure(GrayImage(6, 6, 1), masks), MeasurementError);
}

TEST(Measure, GreenFrameTooSmall)
{
    const auto fg = blocks(20, 20, {{8, 8, 11, 11}});
    const auto lab = label_components(fg);
    const auto masks = build_masks(lab.map, lab.regions[0], 2, 4, fg);
    EXPECT_THROW(measure(GrayImage(10, 10, 1), masks), DimensionError);
}
