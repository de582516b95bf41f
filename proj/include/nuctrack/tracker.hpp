#pragma once

#include "nuctrack/error.hpp"
#include "nuctrack/regions.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nuctrack {

enum class TrackStatus { Live, Excluded };

struct TrackEntry {
    int frame = 0;
    Region region;

    friend bool operator==(const TrackEntry&, const TrackEntry&) = default;
};

/// One nucleus followed through time. Once excluded, the history is frozen.
struct Track {
    int id = 0;
    std::vector<TrackEntry> history;
    TrackStatus status = TrackStatus::Live;

    bool live() const noexcept { return status == TrackStatus::Live; }
    const TrackEntry& last() const { return history.back(); }

    /// Entry recorded for `frame`, or nullptr.
    const TrackEntry* at_frame(int frame) const noexcept
    {
        if (history.empty()) return nullptr;
        const int offset = frame - history.front().frame;
        if (offset < 0 || offset >= static_cast<int>(history.size())) return nullptr;
        return &history[static_cast<std::size_t>(offset)];
    }

    friend bool operator==(const Track&, const Track&) = default;
};

struct FrameAssociation {
    std::vector<std::pair<int, int>> matches; // (previous label, current label)
    std::vector<int> exclusions;              // current labels without a unique match

    friend bool operator==(const FrameAssociation&, const FrameAssociation&) = default;
};

/// Previous regions whose bounding rectangle contains the current centroid.
inline std::vector<Region> candidates_bbox_contains_centroid(std::span<const Region> prev_regions,
                                                             const Region& current)
{
    std::vector<Region> out;
    for (const Region& p : prev_regions) {
        if (p.bbox.contains(current.centroid)) out.push_back(p);
    }
    return out;
}

/// Previous regions whose centroid lies inside the current bounding rectangle.
inline std::vector<Region> candidates_centroid_in_bbox(std::span<const Region> prev_regions,
                                                       const Region& current)
{
    std::vector<Region> out;
    for (const Region& p : prev_regions) {
        if (current.bbox.contains(p.centroid)) out.push_back(p);
    }
    return out;
}

namespace detail {

inline void require_unique_labels(std::span<const Region> regions, const char* which)
{
    std::set<int> seen;
    for (const Region& r : regions) {
        if (!seen.insert(r.label).second) {
            throw InputError(std::string("associate_frame: duplicate label ") + std::to_string(r.label) +
                             " in " + which + " regions");
        }
    }
}

} // namespace detail

/// Mutual containment matching. A current region is tentatively matched when the
/// union of both candidate searches holds exactly one previous region. A previous
/// region claimed by several current regions loses all of them to exclusions.
inline FrameAssociation associate_frame(std::span<const Region> prev_regions, std::span<const Region> curr_regions)
{
    detail::require_unique_labels(prev_regions, "previous");
    detail::require_unique_labels(curr_regions, "current");

    std::vector<std::pair<int, int>> tentative;
    std::vector<int> excluded;
    std::map<int, int> claims;
    for (const Region& cur : curr_regions) {
        std::set<int> candidates;
        for (const Region& p : candidates_bbox_contains_centroid(prev_regions, cur)) candidates.insert(p.label);
        for (const Region& p : candidates_centroid_in_bbox(prev_regions, cur)) candidates.insert(p.label);
        if (candidates.size() == 1) {
            tentative.emplace_back(*candidates.begin(), cur.label);
            ++claims[*candidates.begin()];
        } else {
            excluded.push_back(cur.label);
        }
    }

    FrameAssociation out;
    for (const auto& [prev, cur] : tentative) {
        if (claims[prev] == 1) out.matches.emplace_back(prev, cur);
        else excluded.push_back(cur);
    }
    std::sort(excluded.begin(), excluded.end());
    out.exclusions = std::move(excluded);
    return out;
}

/// Starts one Live track per region, ids 1..N.
inline std::vector<Track> start_tracks(std::span<const Region> regions, int frame_index = 0)
{
    std::vector<Track> tracks;
    tracks.reserve(regions.size());
    int id = 1;
    for (const Region& r : regions) tracks.push_back({id++, {{frame_index, r}}, TrackStatus::Live});
    return tracks;
}

/// Advances tracks to `frame_index`. Frame 0 seeds one track per region. Afterwards a
/// Live track continues only if its last region was matched; otherwise it is
/// excluded. Matches whose previous region is not owned by a Live track (it was
/// never tracked or was dropped earlier) are ignored; no track is born after frame 0.
inline std::vector<Track> update_tracks(std::vector<Track> tracks, const FrameAssociation& association,
                                        std::span<const Region> curr_regions, int frame_index)
{
    if (frame_index == 0) {
        if (!tracks.empty()) throw ConsistencyError("update_tracks: frame 0 with existing tracks");
        return start_tracks(curr_regions, 0);
    }

    std::map<int, const Region*> current_by_label;
    for (const Region& r : curr_regions) current_by_label[r.label] = &r;

    std::map<int, Track*> live_by_prev_label;
    for (Track& t : tracks) {
        if (!t.live()) continue;
        if (t.last().frame != frame_index - 1) {
            throw ConsistencyError("update_tracks: track " + std::to_string(t.id) + " last seen at frame " +
                                   std::to_string(t.last().frame) + ", expected " +
                                   std::to_string(frame_index - 1));
        }
        live_by_prev_label[t.last().region.label] = &t;
    }

    std::set<int> continued;
    for (const auto& [prev, cur] : association.matches) {
        auto cur_it = current_by_label.find(cur);
        if (cur_it == current_by_label.end()) {
            throw ConsistencyError("update_tracks: match references unknown current label " + std::to_string(cur));
        }
        auto track_it = live_by_prev_label.find(prev);
        if (track_it == live_by_prev_label.end()) continue;
        Track& t = *track_it->second;
        if (!continued.insert(t.id).second) {
            throw ConsistencyError("update_tracks: track " + std::to_string(t.id) + " matched twice");
        }
        t.history.push_back({frame_index, *cur_it->second});
    }

    for (Track& t : tracks) {
        if (t.live() && !continued.contains(t.id)) t.status = TrackStatus::Excluded;
    }
    return tracks;
}

inline std::size_t count_live(std::span<const Track> tracks) noexcept
{
    return static_cast<std::size_t>(std::count_if(tracks.begin(), tracks.end(), [](const Track& t) { return t.live(); }));
}

} // namespace nuctrack
