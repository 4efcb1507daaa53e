#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "ldiphoto/atlas.hpp"
#include "ldiphoto/camera.hpp"
#include "ldiphoto/ldi.hpp"
#include "ldiphoto/outline.hpp"
#include "ldiphoto/triangulate.hpp"

namespace ldiphoto {

struct MeshParams {
    double epsilon = 1.5;
    double stud_spacing = 16.0;
};

/// Interior points on vertical columns spread evenly across the outer ring's width (about one
/// per `spacing`), each column clipped to the polygon's interior spans and subdivided evenly.
/// Points closer than 0.1 px to the boundary are left out.
std::vector<Eigen::Vector2d> insert_studs(const std::vector<Ring2d>& rings, double spacing);

struct TexturedMesh {
    std::vector<Eigen::Vector3d> positions;  // camera frame: x right, y down, z forward
    std::vector<Eigen::Vector2d> uvs;        // atlas-normalized, origin top-left
    std::vector<Eigen::Vector3i> triangles;  // counterclockwise in lattice coordinates
    std::vector<Eigen::Vector2d> lattice;    // image-plane position of each vertex
    std::vector<int> chart;                  // chart of each vertex
    std::vector<float> disparity;
};

struct MeshStats {
    int charts = 0;
    int segments = 0;
    int refinement_rounds = 0;
    int studs = 0;
    int dropped_studs = 0;
};

/// Disparity at a lattice corner of a chart: mean over the pixels linked to the chart's member
/// there, staying within the four pixels around the corner.
double corner_disparity(const Ldi& ldi, const PositionIndex& positions, const std::vector<int>& chart_of_pixel, int chart,
                        const Eigen::Vector2i& corner);

/// Outlines, shared-segment simplification, studs, triangulation and lift along camera rays.
TexturedMesh build_mesh(const Ldi& ldi, const Atlas& atlas, const Camera& camera, const MeshParams& params,
                        MeshStats* stats = nullptr, Outlines* outlines = nullptr);

/// Wavefront OBJ referencing `texture_file` through a sibling .mtl.
void write_obj(const TexturedMesh& mesh, const std::string& path, const std::string& texture_file);

}  // namespace ldiphoto
