#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ldiphoto/image.hpp"
#include "ldiphoto/mesher.hpp"

namespace ldiphoto {

struct PipelineConfig {
    // depth
    double tau_disp = 0.05;
    int median_kernel = 5;
    double sigma_disparity = 0.2;
    int min_component = 20;
    // occluded geometry
    int iterations = 50;
    int min_group_length = 20;
    // color
    std::string inpainter = "diffusion";  // diffusion | neural
    std::string network_path;              // neural only: NetworkSpec JSON
    std::string weights_path;              // neural only
    int near_edge_margin = 3;
    int diffusion_iterations = 2000;
    double diffusion_tolerance = 1e-6;
    // texture
    int max_chart_size = 256;
    int edge_exclusion = 4;
    int pad = 4;
    int max_atlas_size = 8192;
    std::string block_fill = "diffuse";  // diffuse | solid
    int jpeg_quality = 90;
    // mesh
    double epsilon = 1.5;
    double stud_spacing = 16;
    double fov_deg = 60;
    double eps_disp = 0.01;

    /// Throws InputError naming the first field out of range.
    void check() const;
    std::string to_json() const;
    /// Missing fields keep their defaults; unknown fields are an error.
    static PipelineConfig from_json(const std::string& text);
    static PipelineConfig load(const std::filesystem::path& path);
};

struct TimingReport {
    std::vector<std::pair<std::string, double>> stages;  // milliseconds
    double total_ms() const;
    std::string to_json() const;
    std::string to_table() const;
};

inline const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {
        "Depth input",        "Depth filter",           "Connecting components",   "Occluded geometry",
        "Color inpainting",   "Texture chart generation", "Texture chart padding", "Meshing"};
    return names;
}

struct PipelineResult {
    std::vector<std::uint8_t> glb;
    TimingReport timing;
    TexturedMesh mesh;
    MeshStats mesh_stats;
    int ldi_pixels = 0;
    int hidden_pixels = 0;
    int max_layers = 0;
    int charts = 0;
    int atlas_width = 0, atlas_height = 0;
};

/// depth-prep -> lift -> hallucinate -> inpaint -> atlas -> mesh -> glb. The disparity is
/// resampled to the image size when they differ. Errors keep their type and gain the stage name.
PipelineResult run_pipeline(const Imagef& image, const DisparityImage& disparity, const PipelineConfig& config,
                            const std::optional<std::filesystem::path>& debug_dir = std::nullopt);

/// Reads the inputs, runs the pipeline and writes the glb (and the timing report when given).
PipelineResult process(const std::filesystem::path& image_path, const std::filesystem::path& disparity_path,
                       const std::filesystem::path& out_path, const PipelineConfig& config,
                       const std::optional<std::filesystem::path>& debug_dir = std::nullopt,
                       const std::optional<std::filesystem::path>& report_path = std::nullopt);

/// Depth filter stage on its own: weighted median then small-component merge.
DisparityImage clean_depth(const DisparityImage& disparity, const PipelineConfig& config);

}  // namespace ldiphoto
