#include "ldiphoto/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ldiphoto/atlas.hpp"
#include "ldiphoto/depth_prep.hpp"
#include "ldiphoto/error.hpp"
#include "ldiphoto/gltf.hpp"
#include "ldiphoto/hallucinate.hpp"
#include "ldiphoto/image_io.hpp"
#include "ldiphoto/inpaint.hpp"
#include "ldiphoto/nn/network.hpp"
#include "ldiphoto/nn/weights.hpp"

namespace ldiphoto {

namespace {

using nlohmann::json;

void require(bool ok, const std::string& field, const std::string& rule) {
    if (!ok) throw InputError("config field '" + field + "' must be " + rule);
}

template <typename Fn>
void timed(TimingReport& report, const std::string& name, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        fn();
    } catch (const InputError& e) {
        throw InputError(name + ": " + e.what());
    } catch (const GeometryError& e) {
        throw GeometryError(name + ": " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(name + ": " + e.what());
    }
    const auto t1 = std::chrono::steady_clock::now();
    report.stages.emplace_back(name, std::chrono::duration<double, std::milli>(t1 - t0).count());
}

}  // namespace

void PipelineConfig::check() const {
    require(tau_disp > 0 && tau_disp < 1, "tau_disp", "in (0, 1)");
    require(median_kernel >= 1 && median_kernel <= 15 && median_kernel % 2 == 1, "median_kernel", "odd, 1..15");
    require(sigma_disparity > 0, "sigma_disparity", "positive");
    require(min_component >= 1, "min_component", ">= 1");
    require(iterations >= 0 && iterations <= 1000, "iterations", "in [0, 1000]");
    require(min_group_length >= 1, "min_group_length", ">= 1");
    require(inpainter == "diffusion" || inpainter == "neural", "inpainter", "'diffusion' or 'neural'");
    require(inpainter != "neural" || (!network_path.empty() && !weights_path.empty()), "weights_path",
            "set together with network_path for the neural inpainter");
    require(near_edge_margin >= 0, "near_edge_margin", ">= 0");
    require(diffusion_iterations >= 1, "diffusion_iterations", ">= 1");
    require(diffusion_tolerance > 0, "diffusion_tolerance", "positive");
    require(max_chart_size >= 1, "max_chart_size", ">= 1");
    require(edge_exclusion >= 0, "edge_exclusion", ">= 0");
    require(pad >= 0 && pad <= 64, "pad", "in [0, 64]");
    require(max_atlas_size >= 16, "max_atlas_size", ">= 16");
    require(block_fill == "diffuse" || block_fill == "solid", "block_fill", "'diffuse' or 'solid'");
    require(jpeg_quality >= 1 && jpeg_quality <= 100, "jpeg_quality", "in [1, 100]");
    require(epsilon >= 0, "epsilon", ">= 0");
    require(stud_spacing > 0, "stud_spacing", "positive");
    require(fov_deg > 10 && fov_deg < 120, "fov_deg", "in (10, 120)");
    require(eps_disp > 0, "eps_disp", "positive");
}

#define LDIPHOTO_CONFIG_FIELDS(X)                                                                              \
    X(tau_disp) X(median_kernel) X(sigma_disparity) X(min_component) X(iterations) X(min_group_length)          \
    X(inpainter) X(network_path) X(weights_path) X(near_edge_margin) X(diffusion_iterations)                    \
    X(diffusion_tolerance) X(max_chart_size) X(edge_exclusion) X(pad) X(max_atlas_size) X(block_fill)           \
    X(jpeg_quality) X(epsilon) X(stud_spacing) X(fov_deg) X(eps_disp)

std::string PipelineConfig::to_json() const {
    json doc;
#define X(f) doc[#f] = f;
    LDIPHOTO_CONFIG_FIELDS(X)
#undef X
    return doc.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("config must be a JSON object");
    PipelineConfig c;
    for (const auto& [key, value] : doc.items()) {
        bool known = false;
        try {
#define X(f)                       \
    if (key == #f) {               \
        value.get_to(c.f);         \
        known = true;              \
    }
            LDIPHOTO_CONFIG_FIELDS(X)
#undef X
        } catch (const json::exception&) {
            throw InputError("config field '" + key + "' has the wrong type");
        }
        if (!known) throw InputError("unknown config field '" + key + "'");
    }
    c.check();
    return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

double TimingReport::total_ms() const {
    double t = 0;
    for (const auto& [name, ms] : stages) t += ms;
    return t;
}

std::string TimingReport::to_json() const {
    json rows = json::array();
    for (const auto& [name, ms] : stages) rows.push_back({{"stage", name}, {"ms", ms}});
    return json{{"stages", rows}, {"total_ms", total_ms()}}.dump(2);
}

std::string TimingReport::to_table() const {
    std::string out;
    char line[96];
    for (const auto& [name, ms] : stages) {
        std::snprintf(line, sizeof line, "%-26s %9.1f ms\n", name.c_str(), ms);
        out += line;
    }
    std::snprintf(line, sizeof line, "%-26s %9.1f ms\n", "Total", total_ms());
    return out + line;
}

DisparityImage clean_depth(const DisparityImage& disparity, const PipelineConfig& config) {
    FilterParams fp;
    fp.kernel_size = config.median_kernel;
    fp.sigma_disparity = float(config.sigma_disparity);
    fp.tau_disp = float(config.tau_disp);
    fp.min_component = config.min_component;
    fp.check();
    return merge_small_components(weighted_median_filter(disparity, fp), fp);
}

PipelineResult run_pipeline(const Imagef& image, const DisparityImage& disparity, const PipelineConfig& config,
                            const std::optional<std::filesystem::path>& debug_dir) {
    config.check();
    if (image.channels() != 3) throw InputError("expected an RGB image");
    if (debug_dir) std::filesystem::create_directories(*debug_dir);
    auto dump = [&](const std::string& name) { return *debug_dir / name; };
    const float tau = float(config.tau_disp);

    PipelineResult result;
    TimingReport& timing = result.timing;
    DisparityImage disp = disparity;
    timed(timing, "Depth input", [&] {
        if (disp.width() != image.width() || disp.height() != image.height())
            disp = to_disparity(resize_bilinear(to_image(disp), image.width(), image.height()));
        if (debug_dir) io::write_disparity_png(dump("depth_input.png"), disp);
    });
    timed(timing, "Depth filter", [&] {
        disp = clean_depth(disp, config);
        if (debug_dir) io::write_disparity_png(dump("depth_filtered.png"), disp);
    });
    Ldi ldi;
    timed(timing, "Connecting components", [&] { ldi = lift_to_ldi(image, disp, tau); });
    timed(timing, "Occluded geometry", [&] {
        HallucinateParams hp;
        hp.tau_disp = tau;
        hp.iterations = config.iterations;
        hp.min_group_length = config.min_group_length;
        ldi = hallucinate(ldi, hp);
        if (debug_dir) dump_layers(ldi, dump("layers"));
    });
    for (int k = 0; k < ldi.size(); ++k) result.hidden_pixels += ldi.known(k) ? 0 : 1;
    result.ldi_pixels = ldi.size();
    result.max_layers = PositionIndex(ldi).max_layers();

    std::vector<PixelClass> classes;
    timed(timing, "Color inpainting", [&] {
        classes = classify(ldi, config.near_edge_margin, tau);
        if (config.inpainter == "neural") {
            const auto net = nn::NetworkSpec::from_json(
                [&] {
                    std::ifstream in(config.network_path);
                    if (!in) throw InputError("cannot read network spec " + config.network_path);
                    std::stringstream ss;
                    ss << in.rdbuf();
                    return ss.str();
                }());
            neural_inpaint(ldi, net, nn::WeightStore::load(config.weights_path), config.near_edge_margin, tau);
        } else {
            DiffusionParams dp;
            dp.max_iterations = config.diffusion_iterations;
            dp.tolerance = float(config.diffusion_tolerance);
            diffusion_inpaint(ldi, select_classes(classes, {PixelClass::OccludedUnknown}), dp);
        }
    });

    AtlasParams ap;
    ap.max_chart_size = config.max_chart_size;
    ap.edge_exclusion = config.edge_exclusion;
    ap.pad = config.pad;
    ap.max_atlas_size = config.max_atlas_size;
    ap.tau_disp = tau;
    Atlas atlas;
    timed(timing, "Texture chart generation",
          [&] { atlas.charts = generate_charts(ldi, ap, &atlas.chart_of_pixel); });
    timed(timing, "Texture chart padding", [&] {
        atlas.padded = pad_charts(atlas.charts, ldi, ap.pad, atlas.chart_of_pixel);
        std::vector<Eigen::Vector2i> sizes;
        for (const PaddedChart& p : atlas.padded) sizes.emplace_back(p.width, p.height);
        atlas.layout = pack_charts(sizes, ap.max_atlas_size);
        atlas.image = render_atlas(atlas.layout, atlas.padded);
        fill_macroblocks(atlas.layout, atlas.image, config.block_fill == "solid" ? BlockFill::Solid : BlockFill::Diffuse);
        if (debug_dir) {
            io::write_png(dump("atlas.png"), atlas.image);
            io::write_png(dump("atlas_classes.png"), atlas_class_image(atlas, classes));
        }
    });
    result.charts = int(atlas.charts.size());
    result.atlas_width = atlas.layout.width;
    result.atlas_height = atlas.layout.height;

    timed(timing, "Meshing", [&] {
        const Camera camera(image.width(), image.height(), config.fov_deg, config.eps_disp);
        MeshParams mp;
        mp.epsilon = config.epsilon;
        mp.stud_spacing = config.stud_spacing;
        result.mesh = build_mesh(ldi, atlas, camera, mp, &result.mesh_stats);
        result.glb = export_glb(result.mesh, atlas.image, config.jpeg_quality);
        if (debug_dir) {
            const auto jpeg = io::encode_jpeg(atlas.image, config.jpeg_quality);
            io::write_file(dump("atlas.jpg"), jpeg);
            write_obj(result.mesh, dump("mesh.obj").string(), "atlas.jpg");
        }
    });
    return result;
}

PipelineResult process(const std::filesystem::path& image_path, const std::filesystem::path& disparity_path,
                       const std::filesystem::path& out_path, const PipelineConfig& config,
                       const std::optional<std::filesystem::path>& debug_dir,
                       const std::optional<std::filesystem::path>& report_path) {
    const auto t0 = std::chrono::steady_clock::now();
    const Imagef image = io::read_color(image_path);
    const DisparityImage disparity = io::read_disparity(disparity_path);
    const double read_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    PipelineResult result = run_pipeline(image, disparity, config, debug_dir);
    result.timing.stages.front().second += read_ms;
    io::write_file(out_path, result.glb);
    if (report_path) {
        std::ofstream out(*report_path);
        if (!out) throw InputError("cannot write report " + report_path->string());
        out << result.timing.to_json() << '\n';
    }
    return result;
}

}  // namespace ldiphoto
