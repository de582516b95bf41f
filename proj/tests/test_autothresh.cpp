#include "nuctrack/autothresh.hpp"
#include "nuctrack/synth.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nuctrack;

namespace {

std::vector<ThresholdScanRow> rows_from(std::initializer_list<std::tuple<int, std::size_t, std::size_t>> spec)
{
    // (threshold, noise_count, clean_components)
    std::vector<ThresholdScanRow> rows;
    for (auto [t, noise, clean] : spec) rows.push_back({t, noise + clean, clean, noise});
    return rows;
}

GrayImage block_image(int w, int h)
{
    GrayImage img(w, h, 0);
    for (int y = 10; y < 30; ++y)
        for (int x = 10; x < 30; ++x) img(x, y) = 200;
    return img;
}

/// Reference scan: binarize each threshold from scratch, count with the flood-fill oracle.
ThresholdScanRow oracle_row(const GrayImage& img, int t, const MorphParams& morph, std::int64_t min_area)
{
    const auto mask = binarize(img, t);
    const auto raw = oracle::flood_fill(mask, Connectivity::Eight).size();
    std::size_t clean = 0;
    for (const auto& c : oracle::flood_fill(clean_mask(mask, morph), Connectivity::Eight)) clean += c.area >= min_area;
    return {t, raw, clean, raw > clean ? raw - clean : 0};
}

} // namespace

TEST(ScanThresholds, BlackImageHasNoComponents)
{
    const auto rows = scan_thresholds(GrayImage(16, 16, 0), {}, 20);
    ASSERT_EQ(rows.size(), 256u);
    for (const auto& r : rows) {
        if (r.threshold >= 1) {
            EXPECT_EQ(r, (ThresholdScanRow{r.threshold, 0, 0, 0}));
        }
    }
    EXPECT_EQ(rows.front().threshold, 255);
    EXPECT_EQ(rows.back().threshold, 0);
}

TEST(ScanThresholds, SingleBlock)
{
    const auto img = block_image(40, 40);
    const MorphParams morph{1, 0, StructuringElement::Square3x3};
    EXPECT_EQ(oracle_row(img, 100, morph, 20), (ThresholdScanRow{100, 1, 1, 0}));
    const auto rows = scan_thresholds(img, morph, 20);
    EXPECT_EQ(rows[255 - 100], (ThresholdScanRow{100, 1, 1, 0}));
}

TEST(ScanThresholds, IsolatedSpecklesCountAsNoise)
{
    auto img = block_image(64, 64);
    // 30 isolated pixels of 150, two pixels apart from each other and the block.
    int placed = 0;
    for (int y = 34; y < 64 && placed < 30; y += 3)
        for (int x = 2; x < 62 && placed < 30; x += 3, ++placed) img(x, y) = 150;
    ASSERT_EQ(placed, 30);
    const MorphParams morph{1, 0, StructuringElement::Square3x3};
    const auto expected = oracle_row(img, 120, morph, 20);
    EXPECT_EQ(expected, (ThresholdScanRow{120, 31, 1, 30}));
    EXPECT_EQ(scan_thresholds(img, morph, 20)[255 - 120], expected);
}

TEST(ScanThresholds, MatchesPerThresholdReference)
{
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> px(0, 255);
    for (int trial = 0; trial < 5; ++trial) {
        GrayImage img(24, 20);
        for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(px(rng));
        const MorphParams morph{trial % 3, trial % 2, StructuringElement::Square3x3};
        const auto rows = scan_thresholds(img, morph, 3);
        for (int t = 0; t < 256; t += 5) ASSERT_EQ(rows[static_cast<std::size_t>(255 - t)], oracle_row(img, t, morph, 3));
    }
}

TEST(ScanThresholds, OpeningOnlyComponentsLieInsideRawOnes)
{
    // Opening never adds foreground, so each clean component sits inside exactly one raw component.
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> px(0, 255);
    for (int trial = 0; trial < 5; ++trial) {
        GrayImage img(30, 30);
        for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(px(rng));
        for (int t = 0; t < 256; t += 15) {
            const auto raw = binarize(img, t);
            const auto clean = clean_mask(raw, {1 + trial % 2, 0, StructuringElement::Square3x3});
            ASSERT_TRUE(clean.subset_of(raw));
            const auto raw_labels = label_components(raw);
            for (const auto& c : oracle::flood_fill(clean, Connectivity::Eight)) {
                const int owner = raw_labels.map(c.pixels[0].first, c.pixels[0].second);
                for (auto [x, y] : c.pixels) EXPECT_EQ(raw_labels.map(x, y), owner);
            }
        }
    }
}

TEST(ScanThresholds, OpeningCanSplitAComponent)
{
    // Two 5x5 blocks joined by a one-pixel bridge: one raw component, two after opening.
    GrayImage img(20, 9, 0);
    for (int y = 2; y < 7; ++y)
        for (int x = 2; x < 7; ++x) img(x, y) = img(x + 9, y) = 200;
    for (int x = 7; x < 11; ++x) img(x, 4) = 200;
    const auto rows = scan_thresholds(img, {1, 0, StructuringElement::Square3x3}, 0);
    EXPECT_EQ(rows[255 - 100], (ThresholdScanRow{100, 1, 2, 0}));
}

TEST(ScanThresholds, NegativeMinAreaIsError)
{
    EXPECT_THROW(scan_thresholds(GrayImage(4, 4), {}, -1), InputError);
}

TEST(NoiseKnee, ReturnsRowBeforeFirstSharpJump)
{
    const auto rows = rows_from({{250, 0, 1}, {200, 0, 2}, {150, 0, 3}, {100, 40, 3}, {50, 60, 1}});
    EXPECT_EQ(find_noise_knee(rows, 2.0, 10), 150);
}

TEST(NoiseKnee, GradualNoiseFallsBackToMaxNuclei)
{
    const auto rows = rows_from({{250, 0, 1}, {200, 1, 4}, {150, 2, 2}, {100, 3, 2}, {50, 4, 0}});
    EXPECT_EQ(find_noise_knee(rows, 2.0, 10), 200);
    EXPECT_EQ(find_noise_knee(rows, 2.0, 10), find_max_nuclei_threshold(rows));
}

TEST(NoiseKnee, AllZeroNoiseFallsBack)
{
    const auto rows = rows_from({{30, 0, 0}, {20, 0, 7}, {10, 0, 7}});
    EXPECT_EQ(find_noise_knee(rows, 2.0, 10), 20);
}

TEST(NoiseKnee, RelativeJumpMustAlsoHold)
{
    // 10 -> 25 is +15, below 2 x 10; 25 -> 80 is +55, above 2 x 25.
    const auto rows = rows_from({{200, 10, 1}, {150, 25, 1}, {100, 80, 1}});
    EXPECT_EQ(find_noise_knee(rows, 2.0, 10), 150);
    const auto gradual = rows_from({{200, 10, 1}, {150, 25, 1}, {100, 60, 1}});
    EXPECT_EQ(find_noise_knee(gradual, 2.0, 10), 200);
}

TEST(NoiseKnee, InvalidArguments)
{
    const auto rows = rows_from({{1, 0, 0}});
    EXPECT_THROW(find_noise_knee({}, 2.0, 10), InputError);
    EXPECT_THROW(find_noise_knee(rows, 1.0, 10), InputError);
    EXPECT_THROW(find_noise_knee(rows, 2.0, 0), InputError);
}

TEST(MaxNuclei, TieBreaksTowardHigherThreshold)
{
    EXPECT_EQ(find_max_nuclei_threshold(rows_from({{200, 0, 1}, {150, 0, 5}, {100, 0, 5}, {50, 0, 2}})), 150);
    EXPECT_EQ(find_max_nuclei_threshold(rows_from({{128, 0, 3}})), 128);
    EXPECT_EQ(find_max_nuclei_threshold(rows_from({{90, 0, 0}, {80, 0, 0}})), 90);
    EXPECT_THROW(find_max_nuclei_threshold({}), InputError);
}

TEST(DecideThreshold, FloorOfMean)
{
    // knee 180 (row before the jump), max nuclei 120
    auto rows = rows_from({{200, 0, 1}, {180, 0, 2}, {170, 50, 2}, {120, 60, 9}, {100, 90, 1}});
    auto d = decide_threshold(rows, {});
    EXPECT_EQ(d, (ThresholdDecision{180, 120, 150}));

    rows = rows_from({{200, 0, 1}, {151, 0, 2}, {140, 50, 2}, {120, 60, 9}});
    d = decide_threshold(rows, {});
    EXPECT_EQ(d, (ThresholdDecision{151, 120, 135}));
}

TEST(SelectThreshold, NoiseFreeTwoLevelImagePicksTopOfForeground)
{
    // Every threshold in (30, 180] sees the one blob; tie-break picks 180 and
    // without noise the knee falls back to the same threshold.
    synth::BlobSpec b{1, {{32, 32}}, 8.0, 180, 200, 50};
    const auto seq = synth::generate(std::span(&b, 1), 1, {64, 64, 30, 10, 8.0}, {}, 1);
    const auto rows = scan_thresholds(seq.red[0], {}, 20);
    for (const auto& r : rows) {
        if (r.threshold > 30 && r.threshold <= 180) {
            EXPECT_EQ(r.clean_components, 1u);
        }
    }
    EXPECT_EQ(select_threshold(seq.red[0], {}), (ThresholdDecision{180, 180, 180}));
}

TEST(SelectThreshold, SpeckledBlobsRecoverGroundTruthMask)
{
    synth::DriftSceneParams p;
    p.width = 200;
    p.height = 160;
    p.blobs = 4;
    p.frames = 1;
    const auto specs = synth::make_drift_scene(p, 5);
    synth::SceneParams scene{200, 160, 30, 10, 8.0};
    const auto noisy = synth::generate(specs, 1, scene, {0.01, 100}, 5);
    const auto clean = synth::generate(specs, 1, scene, {}, 5);

    const ThresholdParams params;
    const auto d = select_threshold(noisy.red[0], params);
    EXPECT_GT(d.selected, 30);
    EXPECT_LE(d.selected, 180);
    const auto got = clean_mask(binarize(noisy.red[0], d.selected), params.morph);
    const auto truth = clean_mask(binarize(clean.red[0], 180), params.morph);
    EXPECT_EQ(got, truth);
}

TEST(SelectThreshold, FeaturelessFramesSelectNothing)
{
    // At t <= min(img) the frame is one solid block; selection ignores those rows.
    for (std::uint8_t v : {0, 30, 254}) {
        const GrayImage img(40, 30, v);
        const auto d = select_threshold(img, {});
        EXPECT_EQ(d, (ThresholdDecision{255, 255, 255})) << "level " << int(v);
        EXPECT_TRUE(binarize(img, d.selected).none());
    }
}

TEST(SelectThreshold, Deterministic)
{
    std::mt19937 rng(2);
    std::uniform_int_distribution<int> px(0, 255);
    GrayImage img(50, 40);
    for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(px(rng));
    const auto a = select_threshold(img, {});
    const auto b = select_threshold(img, {});
    EXPECT_EQ(a, b);
    EXPECT_GE(a.selected, std::min(a.knee_threshold, a.max_nuclei_threshold));
    EXPECT_LE(a.selected, std::max(a.knee_threshold, a.max_nuclei_threshold));
}

TEST(ScanCsv, HeaderAndRows)
{
    const auto csv = scan_csv(rows_from({{7, 2, 3}}));
    EXPECT_EQ(csv, "threshold,raw_components,clean_components,noise_count\n7,5,3,2\n");
}
