#include "ldiphoto/mesher.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "ldiphoto/error.hpp"
#include "ldiphoto/parallel.hpp"

namespace ldiphoto {

std::vector<Eigen::Vector2d> insert_studs(const std::vector<Ring2d>& rings, double spacing) {
    std::vector<Eigen::Vector2d> studs;
    if (rings.empty() || rings.front().empty() || spacing <= 0) return studs;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    for (const auto& p : rings.front()) {
        xmin = std::min(xmin, p.x());
        xmax = std::max(xmax, p.x());
    }
    const double width = xmax - xmin;
    const int columns = int(std::lround(width / spacing));
    for (int i = 1; i < columns; ++i) {
        const double x = xmin + width * i / columns;
        std::vector<double> ys;
        for (const Ring2d& ring : rings)
            for (std::size_t e = 0; e < ring.size(); ++e) {
                const auto &a = ring[e], &b = ring[(e + 1) % ring.size()];
                if ((a.x() <= x) != (b.x() <= x)) ys.push_back(a.y() + (x - a.x()) * (b.y() - a.y()) / (b.x() - a.x()));
            }
        std::sort(ys.begin(), ys.end());
        for (std::size_t s = 0; s + 1 < ys.size(); s += 2) {
            const double y0 = ys[s], len = ys[s + 1] - ys[s];
            const int parts = int(std::lround(len / spacing));
            for (int j = 1; j < parts; ++j) {
                const Eigen::Vector2d p(x, y0 + len * j / parts);
                double clearance = std::numeric_limits<double>::infinity();
                for (const Ring2d& ring : rings)
                    for (std::size_t e = 0; e < ring.size(); ++e)
                        clearance = std::min(clearance, point_segment_distance(p, ring[e], ring[(e + 1) % ring.size()]));
                if (clearance >= 0.1) studs.push_back(p);
            }
        }
    }
    return studs;
}

double corner_disparity(const Ldi& ldi, const PositionIndex& positions, const std::vector<int>& chart_of_pixel, int chart,
                        const Eigen::Vector2i& corner) {
    auto around = [&](int x, int y) {
        return (x == corner.x() - 1 || x == corner.x()) && (y == corner.y() - 1 || y == corner.y());
    };
    int start = -1;
    for (int y = corner.y() - 1; y <= corner.y(); ++y)
        for (int x = corner.x() - 1; x <= corner.x(); ++x) {
            if (x < 0 || y < 0 || x >= ldi.width() || y >= ldi.height()) continue;
            for (int k : positions.at(x, y))
                if (chart_of_pixel[std::size_t(k)] == chart && (start < 0 || k < start)) start = k;
        }
    if (start < 0) throw GeometryError("corner of chart " + std::to_string(chart) + " has no member pixel");
    std::vector<int> group{start};
    for (std::size_t i = 0; i < group.size(); ++i)
        for (Dir d : kAllDirs) {
            const int n = ldi.neighbor(group[i], d);
            if (n < 0 || !around(ldi.x(n), ldi.y(n))) continue;
            if (std::find(group.begin(), group.end(), n) == group.end()) group.push_back(n);
        }
    std::sort(group.begin(), group.end());
    double sum = 0;
    for (int k : group) sum += ldi.disparity(k);
    return sum / double(group.size());
}

namespace {

struct ChartMesh {
    std::vector<Eigen::Vector2d> lattice;
    std::vector<double> disparity;
    std::vector<Eigen::Vector3i> triangles;
    int studs = 0;
    int dropped = 0;
};

ChartMesh mesh_chart(const Ldi& ldi, const PositionIndex& positions, const Atlas& atlas, const Outlines& outlines,
                     int c, const MeshParams& params) {
    const Chart& chart = atlas.charts[std::size_t(c)];
    const auto rings = simplified_rings(outlines, c);
    const auto studs = insert_studs(rings, params.stud_spacing);
    Triangulation tri = triangulate(rings, studs);

    ChartMesh out;
    out.studs = int(studs.size());
    out.dropped = tri.dropped_points;
    out.lattice = tri.vertices;
    out.triangles = std::move(tri.triangles);
    out.disparity.resize(out.lattice.size());

    const int bw = chart.width();
    std::vector<int> cell(std::size_t(bw) * chart.height(), -1);
    for (int k : chart.pixels) cell[std::size_t(ldi.y(k) - chart.y0) * bw + (ldi.x(k) - chart.x0)] = k;

    for (std::size_t v = 0; v < out.lattice.size(); ++v) {
        const Eigen::Vector2d p = out.lattice[v];
        if (int(v) < tri.boundary_vertices) {
            out.disparity[v] = corner_disparity(ldi, positions, atlas.chart_of_pixel, c,
                                                Eigen::Vector2i(int(std::lround(p.x())), int(std::lround(p.y()))));
            continue;
        }
        // nearest member pixel center, searched in growing squares
        const int cx = int(std::floor(p.x())), cy = int(std::floor(p.y()));
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int r = 0; r <= std::max(bw, chart.height()); ++r) {
            if (best >= 0 && double(r - 1) > best_d) break;
            for (int y = cy - r; y <= cy + r; ++y)
                for (int x = cx - r; x <= cx + r; ++x) {
                    if (std::max(std::abs(x - cx), std::abs(y - cy)) != r) continue;
                    if (x < chart.x0 || y < chart.y0 || x >= chart.x1 || y >= chart.y1) continue;
                    const int k = cell[std::size_t(y - chart.y0) * bw + (x - chart.x0)];
                    if (k < 0) continue;
                    const double d = (Eigen::Vector2d(x + 0.5, y + 0.5) - p).norm();
                    if (d < best_d || (d == best_d && k < best)) {
                        best_d = d;
                        best = k;
                    }
                }
        }
        out.disparity[v] = ldi.disparity(best);
    }
    return out;
}

}  // namespace

TexturedMesh build_mesh(const Ldi& ldi, const Atlas& atlas, const Camera& camera, const MeshParams& params,
                        MeshStats* stats, Outlines* outlines_out) {
    Outlines outlines = build_outlines(ldi, atlas.charts, atlas.chart_of_pixel);
    simplify(outlines, params.epsilon);
    const PositionIndex positions(ldi);

    const int n = int(atlas.charts.size());
    std::vector<ChartMesh> parts(std::size_t(n), ChartMesh{});
    parallel_for(0, n, [&](long c) { parts[std::size_t(c)] = mesh_chart(ldi, positions, atlas, outlines, int(c), params); });

    TexturedMesh mesh;
    const Eigen::Vector2d atlas_size(atlas.layout.width, atlas.layout.height);
    MeshStats s;
    s.charts = n;
    s.segments = int(outlines.segments.size());
    s.refinement_rounds = outlines.refinement_rounds;
    for (int c = 0; c < n; ++c) {
        const ChartMesh& part = parts[std::size_t(c)];
        const int base = int(mesh.positions.size());
        const Eigen::Vector2d shift =
            (atlas.layout.offsets[std::size_t(c)] - atlas.padded[std::size_t(c)].origin).cast<double>();
        for (std::size_t v = 0; v < part.lattice.size(); ++v) {
            const Eigen::Vector2d p = part.lattice[v];
            mesh.positions.push_back(camera.unproject(p, part.disparity[v]));
            mesh.uvs.push_back((p + shift).cwiseQuotient(atlas_size));
            mesh.lattice.push_back(p);
            mesh.chart.push_back(c);
            mesh.disparity.push_back(float(part.disparity[v]));
        }
        for (const auto& t : part.triangles) mesh.triangles.push_back(t.array() + base);
        s.studs += part.studs;
        s.dropped_studs += part.dropped;
    }
    if (stats) *stats = s;
    if (outlines_out) *outlines_out = std::move(outlines);
    return mesh;
}

void write_obj(const TexturedMesh& mesh, const std::string& path, const std::string& texture_file) {
    const std::string mtl_path = path.substr(0, path.find_last_of('.')) + ".mtl";
    const std::string mtl_name = mtl_path.substr(mtl_path.find_last_of("/\\") + 1);
    std::ofstream mtl(mtl_path);
    mtl << "newmtl photo\nKa 1 1 1\nKd 1 1 1\nillum 0\nmap_Kd " << texture_file << "\n";
    std::ofstream obj(path);
    if (!obj || !mtl) throw InputError("cannot write " + path);
    obj << "mtllib " << mtl_name << "\nusemtl photo\n";
    obj.precision(9);
    for (const auto& p : mesh.positions) obj << "v " << p.x() << ' ' << -p.y() << ' ' << -p.z() << '\n';
    for (const auto& t : mesh.uvs) obj << "vt " << t.x() << ' ' << 1.0 - t.y() << '\n';
    for (const auto& t : mesh.triangles) {
        // y and z flipped above, so the winding flips too
        obj << "f";
        for (int k : {0, 2, 1}) obj << ' ' << t[k] + 1 << '/' << t[k] + 1;
        obj << '\n';
    }
}

}  // namespace ldiphoto
