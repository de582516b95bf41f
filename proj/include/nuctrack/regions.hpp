#pragma once

#include "nuctrack/error.hpp"
#include "nuctrack/image.hpp"

#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

namespace nuctrack {

enum class Connectivity { Four, Eight };

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Inclusive integer pixel bounds.
struct BBox {
    int min_x = 0;
    int min_y = 0;
    int max_x = -1;
    int max_y = -1;

    int width() const noexcept { return max_x - min_x + 1; }
    int height() const noexcept { return max_y - min_y + 1; }

    bool contains(Point2 p) const noexcept
    {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }

    friend bool operator==(const BBox&, const BBox&) = default;
};

struct Region {
    int label = 0;
    std::int64_t area = 0;
    Point2 centroid;
    BBox bbox;

    friend bool operator==(const Region&, const Region&) = default;
};

/// Per-pixel component labels; 0 is background.
class LabelMap {
public:
    LabelMap() = default;
    LabelMap(int width, int height)
        : width_(width), height_(height), labels_(static_cast<std::size_t>(width) * height, 0)
    {
        detail::check_dims(width, height, "LabelMap");
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    std::int32_t operator()(int x, int y) const { return labels_[index(x, y)]; }
    std::int32_t& operator()(int x, int y) { return labels_[index(x, y)]; }

    std::span<const std::int32_t> labels() const noexcept { return labels_; }

    friend bool operator==(const LabelMap&, const LabelMap&) = default;

private:
    std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::int32_t> labels_;
};

struct Labeling {
    LabelMap map;
    std::vector<Region> regions;
};

namespace detail {

/// Horizontal foreground run [x0, x1] in row y.
struct Run {
    int y;
    int x0;
    int x1;
};

/// Index of the first bit >= `from` equal to `value`, or `width` if none.
inline int next_bit(std::span<const BinaryMask::Word> row, int from, int width, bool value) noexcept
{
    while (from < width) {
        const std::size_t j = static_cast<std::size_t>(from / 64);
        BinaryMask::Word w = value ? row[j] : ~row[j];
        w &= ~BinaryMask::Word{0} << (from % 64);
        if (w != 0) {
            const int x = static_cast<int>(j * 64) + std::countr_zero(w);
            return x < width ? x : width;
        }
        from = static_cast<int>((j + 1) * 64);
    }
    return width;
}

/// Run-length union-find labeling. `parent` ends up with every run pointing
/// (after find) at the lowest-index run of its component, which is also the
/// component's first run in raster order.
struct RunForest {
    std::vector<Run> runs;
    std::vector<std::uint32_t> parent;

    std::uint32_t find(std::uint32_t i) noexcept
    {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }

    void unite(std::uint32_t a, std::uint32_t b) noexcept
    {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent[b] = a;
        else parent[a] = b;
    }
};

inline RunForest build_runs(const BinaryMask& mask, Connectivity conn)
{
    RunForest f;
    const int width = mask.width();
    const int reach = conn == Connectivity::Eight ? 1 : 0;
    std::size_t prev_begin = 0, prev_end = 0;
    for (int y = 0; y < mask.height(); ++y) {
        auto row = mask.row(y);
        const std::size_t cur_begin = f.runs.size();
        int x = next_bit(row, 0, width, true);
        while (x < width) {
            const int end = next_bit(row, x, width, false);
            f.runs.push_back({y, x, end - 1});
            f.parent.push_back(static_cast<std::uint32_t>(f.runs.size() - 1));
            x = next_bit(row, end, width, true);
        }
        const std::size_t cur_end = f.runs.size();

        std::size_t j = prev_begin;
        for (std::size_t i = cur_begin; i < cur_end; ++i) {
            const Run& c = f.runs[i];
            while (j < prev_end && f.runs[j].x1 < c.x0 - reach) ++j;
            for (std::size_t k = j; k < prev_end && f.runs[k].x0 <= c.x1 + reach; ++k) {
                f.unite(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(k));
            }
        }
        prev_begin = cur_begin;
        prev_end = cur_end;
    }
    return f;
}

} // namespace detail

/// Partitions the foreground into maximal connected components. Labels start at 1
/// and follow the raster-scan order of each component's first pixel.
inline Labeling label_components(const BinaryMask& mask, Connectivity conn = Connectivity::Eight)
{
    detail::RunForest f = detail::build_runs(mask, conn);
    Labeling out{LabelMap(mask.width(), mask.height()), {}};

    struct Accum {
        std::int64_t area = 0, sum_x = 0, sum_y = 0;
        BBox box{};
    };
    std::vector<std::int32_t> label_of_root(f.runs.size(), 0);
    std::vector<Accum> acc;

    for (std::size_t i = 0; i < f.runs.size(); ++i) {
        const auto root = f.find(static_cast<std::uint32_t>(i));
        if (root == i) {
            acc.push_back({0, 0, 0, BBox{f.runs[i].x0, f.runs[i].y, f.runs[i].x1, f.runs[i].y}});
            label_of_root[i] = static_cast<std::int32_t>(acc.size());
        }
        const std::int32_t label = label_of_root[root];
        const detail::Run& r = f.runs[i];
        const std::int64_t len = r.x1 - r.x0 + 1;
        Accum& a = acc[static_cast<std::size_t>(label - 1)];
        a.area += len;
        a.sum_x += (static_cast<std::int64_t>(r.x0) + r.x1) * len / 2;
        a.sum_y += static_cast<std::int64_t>(r.y) * len;
        a.box.min_x = std::min(a.box.min_x, r.x0);
        a.box.max_x = std::max(a.box.max_x, r.x1);
        a.box.min_y = std::min(a.box.min_y, r.y);
        a.box.max_y = std::max(a.box.max_y, r.y);
        for (int x = r.x0; x <= r.x1; ++x) out.map(x, r.y) = label;
    }

    out.regions.reserve(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) {
        const Accum& a = acc[k];
        out.regions.push_back({static_cast<int>(k + 1), a.area,
                               {static_cast<double>(a.sum_x) / static_cast<double>(a.area),
                                static_cast<double>(a.sum_y) / static_cast<double>(a.area)},
                               a.box});
    }
    return out;
}

/// Number of components with area >= min_area, without building a label map.
inline std::size_t count_components(const BinaryMask& mask, Connectivity conn = Connectivity::Eight,
                                    std::int64_t min_area = 0)
{
    detail::RunForest f = detail::build_runs(mask, conn);
    if (min_area <= 1) {
        std::size_t n = 0;
        for (std::size_t i = 0; i < f.runs.size(); ++i) n += f.find(static_cast<std::uint32_t>(i)) == i;
        return n;
    }
    std::vector<std::int64_t> area(f.runs.size(), 0);
    for (std::size_t i = 0; i < f.runs.size(); ++i) {
        area[f.find(static_cast<std::uint32_t>(i))] += f.runs[i].x1 - f.runs[i].x0 + 1;
    }
    std::size_t n = 0;
    for (std::size_t i = 0; i < f.runs.size(); ++i) n += f.parent[i] == i && area[i] >= min_area;
    return n;
}

/// Keeps regions with area >= min_area, preserving order.
inline std::vector<Region> filter_regions(std::span<const Region> regions, std::int64_t min_area)
{
    if (min_area < 0) throw InputError("filter_regions: min_area must be >= 0");
    std::vector<Region> out;
    for (const Region& r : regions) {
        if (r.area >= min_area) out.push_back(r);
    }
    return out;
}

} // namespace nuctrack
