#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "ldiphoto/image.hpp"
#include "ldiphoto/inpaint.hpp"
#include "ldiphoto/ldi.hpp"

namespace ldiphoto {

struct AtlasParams {
    int max_chart_size = 256;
    int edge_exclusion = 4;
    int pad = 4;
    int max_atlas_size = 8192;
    float tau_disp = 0.05f;
};

/// Fold-free connected LDI region. Lattice bounding box is [x0, x1) x [y0, y1).
struct Chart {
    int id = 0;
    std::vector<int> pixels;  // growth order
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool excluded = false;  // built from edge-excluded pixels

    int width() const { return x1 - x0; }
    int height() const { return y1 - y0; }
};

/// Pixels unusable for ordinary charts: up to `range` steps along the back surface across every
/// front-side depth edge.
std::vector<std::uint8_t> edge_excluded_pixels(const Ldi& ldi, int range, float tau_disp);

/// Seed-and-grow in pixel id order. Growth follows connections breadth-first and rejects a pixel
/// that would share an (x, y) with a member, push the bounding box past max_chart_size, or touch
/// a member only diagonally (a pinch), or sit next to a member it is not linked to.
/// Excluded pixels only grow among themselves.
std::vector<Chart> generate_charts(const Ldi& ldi, const AtlasParams& params, std::vector<int>* chart_of_pixel = nullptr);

enum class AtlasClass : std::uint8_t { Empty, Member, PadCopy, PadDiffuse, Macroblock };

/// A chart rendered into its own padded rectangle; lattice (x, y) maps to local (x - origin.x, y - origin.y).
struct PaddedChart {
    int chart = 0;
    Eigen::Vector2i origin;  // lattice coordinates of the local (0, 0)
    int width = 0, height = 0;
    std::vector<AtlasClass> classes;  // width x height
    std::vector<int> member;          // LDI pixel per cell, -1 if none
    Imagef colors;
};

/// Pad ring of `pad` cells: cells reached through LDI connections into other charts copy those
/// pixels, the remaining ring cells are diffused from the chart.
std::vector<PaddedChart> pad_charts(const std::vector<Chart>& charts, const Ldi& ldi, int pad,
                                    const std::vector<int>& chart_of_pixel);

struct AtlasLayout {
    int width = 0, height = 0;
    std::vector<Eigen::Vector2i> offsets;  // per rectangle, top-left in the atlas
    std::vector<AtlasClass> classes;       // width x height, filled by render_atlas / fill_macroblocks
    int attempts = 0;
    std::string growth_policy = "start at roundup16(max(largest side, sqrt(total area))) per axis, "
                                "double the smaller side until everything fits, crop to roundup16 of the used extent";
};

/// Tree (lightmap) packer; rectangles inserted by descending height, ties by index.
AtlasLayout pack_charts(const std::vector<Eigen::Vector2i>& sizes, int max_atlas_size = 8192);

/// Copies padded charts to their placements and fills `layout.classes`.
Imagef render_atlas(AtlasLayout& layout, const std::vector<PaddedChart>& padded);

enum class BlockFill { Diffuse, Solid };

/// Every 16x16 block touched by a chart gets its empty pixels filled (diffusion or a solid
/// mid-gray), untouched blocks become mid-gray.
void fill_macroblocks(AtlasLayout& layout, Imagef& atlas, BlockFill mode = BlockFill::Diffuse);

struct Atlas {
    std::vector<Chart> charts;
    std::vector<int> chart_of_pixel;
    std::vector<PaddedChart> padded;
    AtlasLayout layout;
    Imagef image;
};

/// generate -> pad -> pack -> render -> macroblock fill.
Atlas build_atlas(const Ldi& ldi, const AtlasParams& params, BlockFill mode = BlockFill::Diffuse);

/// Pseudo-colored class image; member pixels use `pixel_classes` when given (per LDI pixel).
Imagef atlas_class_image(const Atlas& atlas, const std::vector<PixelClass>& pixel_classes = {});

int round_up16(int v);

}  // namespace ldiphoto
