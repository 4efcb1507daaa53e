#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "ldiphoto/error.hpp"
#include "ldiphoto/evaluate.hpp"
#include "ldiphoto/image_io.hpp"
#include "ldiphoto/nn/selftest.hpp"
#include "ldiphoto/parallel.hpp"
#include "ldiphoto/pipeline.hpp"
#include "ldiphoto/reproject.hpp"
#include "ldiphoto/synthetic.hpp"

using namespace ldiphoto;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Pose parse_pose(const std::string& text, int width, int height, double fov) {
    if (text.empty()) return default_evaluation_pose(width, height, fov);
    double t[3];
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &t[0], &t[1], &t[2]) != 3)
        throw InputError("pose must be tx,ty,tz");
    return translation_pose(t[0], t[1], t[2]);
}

std::pair<int, int> parse_size(const std::string& text) {
    int w = 0, h = 0;
    if (std::sscanf(text.c_str(), "%dx%d", &w, &h) != 2 || w < 8 || h < 8) throw InputError("size must be WxH, at least 8x8");
    return {w, h};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << text << '\n';
}

// image + disparity from flags: real files, or generated when --synthetic-depth is given
std::pair<Imagef, DisparityImage> load_inputs(const std::string& in, const std::string& depth,
                                              const std::string& synthetic, const std::string& size) {
    if (!synthetic.empty()) {
        Imagef image;
        if (!in.empty()) image = io::read_color(in);
        else {
            const auto [w, h] = parse_size(size);
            image = desk_scene(1, w, h).image;
        }
        return {image, synthetic_depth(parse_synthetic_depth(synthetic), image.width(), image.height())};
    }
    if (in.empty()) throw InputError("--in is required");
    if (depth.empty()) throw InputError("--depth is required (or --synthetic-depth for tests)");
    return {io::read_color(in), io::read_disparity(depth)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Single-image 3D photo pipeline: image + disparity -> layered depth image -> textured glb"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));

    std::string in, depth, out, config_path, debug_dir, report, synthetic, size = "16x16", pose, inpainter = "diffusion",
                                                                            network, weights, out_dir;
    int corpus = 20, count = 100, repeat = 1;
    unsigned seed = 1;

    auto* process_cmd = app.add_subcommand("process", "Run the full pipeline and write a glb");
    process_cmd->add_option("--in", in, "Color image (PNG or JPEG)");
    process_cmd->add_option("--depth", depth, "Disparity (16/8-bit PNG or PFM), 1 = near");
    process_cmd->add_option("--synthetic-depth", synthetic, "Test-only generated disparity: gradient, constant, steps");
    process_cmd->add_option("--size", size, "Synthetic image size WxH when --in is absent");
    process_cmd->add_option("--out", out, "Output .glb")->required();
    process_cmd->add_option("--config", config_path, "PipelineConfig JSON");
    process_cmd->add_option("--debug-dir", debug_dir, "Intermediate images, layers, atlas and OBJ");
    process_cmd->add_option("--report", report, "Timing report JSON");
    process_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));

    auto* clean_cmd = app.add_subcommand("depth-clean", "Weighted median and small-component merge of a disparity map");
    clean_cmd->add_option("--in", in, "Disparity")->required();
    clean_cmd->add_option("--out", out, "Cleaned 16-bit PNG")->required();
    clean_cmd->add_option("--config", config_path, "PipelineConfig JSON");
    clean_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));

    auto* eval_cmd = app.add_subcommand("inpaint-eval", "Novel-view inpainting evaluation (PSNR / SSIM)");
    eval_cmd->add_option("--in", in, "Color image; the synthetic desk corpus is used when absent");
    eval_cmd->add_option("--depth", depth, "Disparity for --in");
    eval_cmd->add_option("--corpus", corpus, "Number of synthetic scenes")->check(CLI::Range(1, 1000));
    eval_cmd->add_option("--inpainter", inpainter, "diffusion, gray, oracle or neural")
        ->check(CLI::IsMember({"diffusion", "gray", "oracle", "neural"}));
    eval_cmd->add_option("--network", network, "NetworkSpec JSON (neural)");
    eval_cmd->add_option("--weights", weights, "Weight file (neural)");
    eval_cmd->add_option("--pose", pose, "Novel-view translation tx,ty,tz (default: 5% of the width sideways)");
    eval_cmd->add_option("--report", report, "Report JSON");
    eval_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));

    auto* reproject_cmd = app.add_subcommand("reproject", "Splat the single-layer LDI into a moved camera");
    reproject_cmd->add_option("--in", in, "Color image")->required();
    reproject_cmd->add_option("--depth", depth, "Disparity")->required();
    reproject_cmd->add_option("--out", out, "Front-layer PNG")->required();
    reproject_cmd->add_option("--pose", pose, "Translation tx,ty,tz");
    reproject_cmd->add_option("--config", config_path, "PipelineConfig JSON (fov, eps_disp, tau_disp)");

    auto* bench_cmd = app.add_subcommand("bench", "Time the pipeline; defaults to the synthetic 1152x1536 scene");
    bench_cmd->add_option("--in", in, "Color image");
    bench_cmd->add_option("--depth", depth, "Disparity");
    bench_cmd->add_option("--config", config_path, "PipelineConfig JSON");
    bench_cmd->add_option("--repeat", repeat, "Runs")->check(CLI::Range(1, 100));
    bench_cmd->add_option("--report", report, "Timing report JSON of the last run");
    bench_cmd->add_option("--out", out, "Also write the glb of the last run");
    bench_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));

    auto* nn_cmd = app.add_subcommand("ldi-nn", "LDI network tools");
    nn_cmd->require_subcommand(1);
    auto* selftest_cmd = nn_cmd->add_subcommand("selftest", "LDI operators vs. the plain 2D reference");
    selftest_cmd->add_option("--count", count, "Random cases")->check(CLI::Range(1, 100000));
    selftest_cmd->add_option("--seed", seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        thread_count() = threads;
        PipelineConfig config;
        if (!config_path.empty()) config = PipelineConfig::load(config_path);

        if (*process_cmd) {
            const auto [image, disp] = load_inputs(in, depth, synthetic, size);
            std::optional<std::filesystem::path> dbg;
            if (!debug_dir.empty()) dbg = debug_dir;
            const PipelineResult r = run_pipeline(image, disp, config, dbg);
            io::write_file(out, r.glb);
            if (!report.empty()) write_text(report, r.timing.to_json());
            std::cout << r.timing.to_table();
            std::cout << "layers " << r.max_layers << ", hidden pixels " << r.hidden_pixels << ", charts " << r.charts
                      << ", atlas " << r.atlas_width << "x" << r.atlas_height << ", triangles " << r.mesh.triangles.size()
                      << ", glb " << r.glb.size() << " bytes\n";
        } else if (*clean_cmd) {
            io::write_disparity_png(out, clean_depth(io::read_disparity(in), config));
        } else if (*eval_cmd) {
            Inpainter fill;
            if (inpainter == "diffusion") fill = diffusion_inpainter();
            else if (inpainter == "gray") fill = constant_inpainter(0.5f);
            else if (inpainter == "oracle") fill = oracle_inpainter();
            else {
                if (network.empty() || weights.empty()) throw InputError("--network and --weights are required for neural");
                fill = neural_inpainter(nn::NetworkSpec::from_json(slurp(network)), nn::WeightStore::load(weights));
            }
            EvaluationParams params;
            params.tau_disp = float(config.tau_disp);
            params.fov_deg = config.fov_deg;
            params.eps_disp = config.eps_disp;
            std::vector<std::pair<std::string, InpaintReport>> rows;
            std::vector<Scene> scenes;
            if (!in.empty()) {
                if (depth.empty()) throw InputError("--depth is required with --in");
                scenes.push_back({in, io::read_color(in), io::read_disparity(depth)});
            } else {
                scenes = desk_corpus(corpus);
            }
            for (const Scene& s : scenes) {
                DisparityImage d = s.disparity;
                if (d.width() != s.image.width() || d.height() != s.image.height())
                    d = to_disparity(resize_bilinear(to_image(d), s.image.width(), s.image.height()));
                const Pose p = parse_pose(pose, s.image.width(), s.image.height(), config.fov_deg);
                rows.emplace_back(s.name, evaluate_inpainting(s.image, d, p, fill, params));
            }
            const std::string doc = report_json(rows, inpainter);
            if (!report.empty()) write_text(report, doc);
            std::cout << doc << '\n';
        } else if (*reproject_cmd) {
            const Imagef image = io::read_color(in);
            DisparityImage d = io::read_disparity(depth);
            if (d.width() != image.width() || d.height() != image.height())
                d = to_disparity(resize_bilinear(to_image(d), image.width(), image.height()));
            const Camera camera(image.width(), image.height(), config.fov_deg, config.eps_disp);
            const Ldi ldi = lift_to_ldi(image, d, float(config.tau_disp));
            const LayeredViewBuffer view =
                reproject_splat(ldi, camera, parse_pose(pose, image.width(), image.height(), config.fov_deg));
            io::write_png(out, view.front_image());
            std::cout << "max layers " << view.max_layers() << '\n';
        } else if (*bench_cmd) {
            Imagef image;
            DisparityImage d;
            if (!in.empty()) {
                if (depth.empty()) throw InputError("--depth is required with --in");
                image = io::read_color(in);
                d = io::read_disparity(depth);
            } else {
                Scene s = teaser_scene();
                image = std::move(s.image);
                d = std::move(s.disparity);
            }
            PipelineResult r;
            for (int i = 0; i < repeat; ++i) {
                r = run_pipeline(image, d, config);
                std::cout << "run " << i + 1 << ": " << r.timing.total_ms() << " ms, glb " << r.glb.size() << " bytes\n";
            }
            std::cout << r.timing.to_table();
            if (!report.empty()) write_text(report, r.timing.to_json());
            if (!out.empty()) io::write_file(out, r.glb);
        } else if (*selftest_cmd) {
            const auto res = nn::equivalence_selftest(count, seed);
            std::cout << res.summary() << '\n';
            return res.passed ? 0 : 4;
        }
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << '\n';
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
