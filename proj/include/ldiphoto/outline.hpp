#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

#include "ldiphoto/atlas.hpp"
#include "ldiphoto/ldi.hpp"
#include "ldiphoto/triangulate.hpp"

namespace ldiphoto {

inline constexpr int kSilhouette = -1;

/// Closed loop of lattice corners; edge i runs from points[i] to points[i + 1] and carries the
/// chart on its other side (kSilhouette if there is no connection across it).
struct OutlineRing {
    std::vector<Eigen::Vector2i> points;
    std::vector<int> tags;
};

/// Outer ring first (positive shoelace area in lattice coordinates), then holes (negative).
struct ChartPolygon {
    int chart = 0;
    std::vector<OutlineRing> rings;
};

/// Every pixel-side between a member and a non-member becomes a unit edge, with the chart
/// interior on the left.
ChartPolygon extract_outline(const Chart& chart, const Ldi& ldi, const std::vector<int>& chart_of_pixel);

/// (lower chart, higher chart or kSilhouette, first, second and last corner) of the
/// polyline as seen from the lower chart.
using SegmentKey = std::array<int, 8>;

struct BoundarySegment {
    SegmentKey key{};
    int owner = 0;   // chart whose ring order is canonical
    int other = kSilhouette;
    std::vector<Eigen::Vector2i> polyline;
    std::vector<Eigen::Vector2i> simplified;
    double epsilon = 0;
};

struct SegmentRef {
    int segment = 0;
    bool reversed = false;
};

struct Outlines {
    std::vector<ChartPolygon> polygons;            // per chart
    std::vector<BoundarySegment> segments;
    std::vector<std::vector<std::vector<SegmentRef>>> refs;  // per chart, per ring, in ring order
    int refinement_rounds = 0;
};

/// Outlines of all charts, split into segments wherever the neighbor across the boundary
/// changes. A ring with a single neighbor is split at its smallest (y, x) corner and at the
/// corner farthest from it. Segments shared by two charts are stored once.
Outlines build_outlines(const Ldi& ldi, const std::vector<Chart>& charts, const std::vector<int>& chart_of_pixel);

/// Indices of the vertices kept by Douglas-Peucker (point-to-segment distance); endpoints
/// always kept.
std::vector<int> douglas_peucker(const std::vector<Eigen::Vector2i>& polyline, double epsilon);

/// Distance from p to the segment [a, b].
double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b);

/// Simplifies every segment once. Segments involved in an invalid chart polygon (crossing or
/// touching edges, collapsed or flipped rings) are redone with half the tolerance, and with
/// zero tolerance once it falls below 0.25.
void simplify(Outlines& outlines, double epsilon);

/// Simplified rings of a chart (outer first), assembled from its segments.
std::vector<Ring2d> simplified_rings(const Outlines& outlines, int chart);

}  // namespace ldiphoto
