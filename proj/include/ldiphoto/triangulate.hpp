#pragma once

#include <Eigen/Core>

#include <vector>

namespace ldiphoto {

using Ring2d = std::vector<Eigen::Vector2d>;

/// Twice the signed area; positive for counterclockwise rings in (x, y).
double signed_area2(const Ring2d& ring);

struct EdgeRef {
    int ring;
    int index;  // edge from point index to index + 1 (cyclic)
};

/// Pairs of ring edges that intersect or touch, other than consecutive edges meeting at their
/// shared vertex. Stops after `limit` pairs.
std::vector<std::pair<EdgeRef, EdgeRef>> find_intersections(const std::vector<Ring2d>& rings, std::size_t limit = 1);

struct Triangulation {
    std::vector<Eigen::Vector2d> vertices;  // ring vertices in ring order, then Steiner points
    std::vector<Eigen::Vector3i> triangles;  // counterclockwise
    int boundary_vertices = 0;
    int dropped_points = 0;  // Steiner points that could not be placed
};

/// Plane-sweep decomposition into y-monotone pieces (handles holes), stack triangulation of
/// each piece, then Steiner point insertion with Delaunay edge flips away from the boundary.
/// rings[0] is the outer ring (positive area), the rest are holes (negative area).
/// Throws GeometryError naming the first intersecting edge pair.
Triangulation triangulate(const std::vector<Ring2d>& rings, const std::vector<Eigen::Vector2d>& steiner = {});

}  // namespace ldiphoto
