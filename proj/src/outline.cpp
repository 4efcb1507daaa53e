#include "ldiphoto/outline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ldiphoto/error.hpp"
#include "ldiphoto/parallel.hpp"

namespace ldiphoto {

namespace {

bool corner_less(const Eigen::Vector2i& a, const Eigen::Vector2i& b) {
    return a.y() < b.y() || (a.y() == b.y() && a.x() < b.x());
}

long area2(const std::vector<Eigen::Vector2i>& pts) {
    long s = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto &a = pts[i], &b = pts[(i + 1) % pts.size()];
        s += long(a.x()) * b.y() - long(b.x()) * a.y();
    }
    return s;
}

SegmentKey make_key(int a, int b, const std::vector<Eigen::Vector2i>& pl) {
    return {a, b, pl.front().x(), pl.front().y(), pl[1].x(), pl[1].y(), pl.back().x(), pl.back().y()};
}

struct AssembledRing {
    Ring2d points;
    std::vector<int> edge_segment;
};

std::vector<AssembledRing> assemble(const Outlines& outlines, int chart) {
    std::vector<AssembledRing> rings;
    for (const auto& ring_refs : outlines.refs[std::size_t(chart)]) {
        AssembledRing r;
        for (const SegmentRef& ref : ring_refs) {
            const auto& s = outlines.segments[std::size_t(ref.segment)].simplified;
            const int n = int(s.size());
            for (int i = 0; i + 1 < n; ++i) {
                const auto& p = s[std::size_t(ref.reversed ? n - 1 - i : i)];
                r.points.emplace_back(p.x(), p.y());
                r.edge_segment.push_back(ref.segment);
            }
        }
        rings.push_back(std::move(r));
    }
    return rings;
}

}  // namespace

ChartPolygon extract_outline(const Chart& chart, const Ldi& ldi, const std::vector<int>& chart_of_pixel) {
    const int bw = chart.width(), bh = chart.height();
    std::vector<int> cell(std::size_t(bw) * bh, -1);
    for (int k : chart.pixels) cell[std::size_t(ldi.y(k) - chart.y0) * bw + (ldi.x(k) - chart.x0)] = k;
    auto member = [&](int x, int y) {
        return x >= chart.x0 && y >= chart.y0 && x < chart.x1 && y < chart.y1 &&
               cell[std::size_t(y - chart.y0) * bw + (x - chart.x0)] >= 0;
    };

    struct Edge {
        Eigen::Vector2i from, to;
        int tag;
    };
    std::vector<Edge> edges;
    const int cw = bw + 1;
    std::vector<int> outgoing(std::size_t(cw) * (bh + 1), -1);
    auto corner_id = [&](const Eigen::Vector2i& p) { return std::size_t(p.y() - chart.y0) * cw + (p.x() - chart.x0); };
    for (int k : chart.pixels) {
        const int x = ldi.x(k), y = ldi.y(k);
        for (Dir d : kAllDirs) {
            if (member(x + dx(d), y + dy(d))) continue;
            const int n = ldi.neighbor(k, d);
            const int tag = n >= 0 ? chart_of_pixel[std::size_t(n)] : kSilhouette;
            Eigen::Vector2i a, b;
            switch (d) {
                case Dir::Up: a = {x, y}, b = {x + 1, y}; break;
                case Dir::Right: a = {x + 1, y}, b = {x + 1, y + 1}; break;
                case Dir::Down: a = {x + 1, y + 1}, b = {x, y + 1}; break;
                case Dir::Left: a = {x, y + 1}, b = {x, y}; break;
            }
            if (outgoing[corner_id(a)] >= 0) throw GeometryError("chart " + std::to_string(chart.id) + " pinches at a corner");
            outgoing[corner_id(a)] = int(edges.size());
            edges.push_back({a, b, tag});
        }
    }

    ChartPolygon poly;
    poly.chart = chart.id;
    std::vector<std::uint8_t> used(edges.size(), 0);
    for (std::size_t ci = 0; ci < outgoing.size(); ++ci) {
        int e = outgoing[ci];
        if (e < 0 || used[std::size_t(e)]) continue;
        OutlineRing ring;
        while (!used[std::size_t(e)]) {
            used[std::size_t(e)] = 1;
            ring.points.push_back(edges[std::size_t(e)].from);
            ring.tags.push_back(edges[std::size_t(e)].tag);
            e = outgoing[corner_id(edges[std::size_t(e)].to)];
        }
        poly.rings.push_back(std::move(ring));
    }
    // corners are scanned in (y, x) order, so the first ring holds the topmost corner: the outer one
    for (std::size_t r = 0; r < poly.rings.size(); ++r)
        if ((area2(poly.rings[r].points) > 0) != (r == 0))
            throw GeometryError("chart " + std::to_string(chart.id) + " outline has unexpected ring orientation");
    return poly;
}

Outlines build_outlines(const Ldi& ldi, const std::vector<Chart>& charts, const std::vector<int>& chart_of_pixel) {
    Outlines out;
    out.polygons.resize(charts.size());
    parallel_for(0, long(charts.size()), [&](long c) {
        out.polygons[std::size_t(c)] = extract_outline(charts[std::size_t(c)], ldi, chart_of_pixel);
    });
    out.refs.resize(charts.size());

    std::map<SegmentKey, int> index;
    for (std::size_t c = 0; c < charts.size(); ++c) {
        const int chart = charts[c].id;
        for (const OutlineRing& ring : out.polygons[c].rings) {
            const int n = int(ring.points.size());
            std::vector<int> splits;
            for (int i = 0; i < n; ++i)
                if (ring.tags[std::size_t((i + n - 1) % n)] != ring.tags[std::size_t(i)]) splits.push_back(i);
            if (splits.empty()) {
                int s = 0;
                for (int i = 1; i < n; ++i)
                    if (corner_less(ring.points[std::size_t(i)], ring.points[std::size_t(s)])) s = i;
                int f = -1;
                long best = -1;
                for (int i = 0; i < n; ++i) {
                    const long d = (ring.points[std::size_t(i)] - ring.points[std::size_t(s)]).cast<long>().squaredNorm();
                    if (d > best || (d == best && corner_less(ring.points[std::size_t(i)], ring.points[std::size_t(f)]))) {
                        best = d;
                        f = i;
                    }
                }
                splits = {std::min(s, f), std::max(s, f)};
            }
            std::vector<SegmentRef> refs;
            for (std::size_t j = 0; j < splits.size(); ++j) {
                const int from = splits[j], to = splits[(j + 1) % splits.size()];
                const int tag = ring.tags[std::size_t(from)];
                std::vector<Eigen::Vector2i> pl;
                for (int i = from;; i = (i + 1) % n) {
                    pl.push_back(ring.points[std::size_t(i)]);
                    if (pl.size() > 1 && i == to) break;
                }
                const bool canonical = tag == kSilhouette || chart < tag;
                if (!canonical) std::reverse(pl.begin(), pl.end());
                const SegmentKey key = canonical ? make_key(chart, tag, pl) : make_key(tag, chart, pl);
                auto it = index.find(key);
                if (it == index.end()) {
                    if (!canonical)
                        throw GeometryError("boundary between charts " + std::to_string(tag) + " and " +
                                            std::to_string(chart) + " does not match");
                    BoundarySegment seg;
                    seg.key = key;
                    seg.owner = chart;
                    seg.other = tag;
                    seg.polyline = std::move(pl);
                    it = index.emplace(key, int(out.segments.size())).first;
                    out.segments.push_back(std::move(seg));
                }
                refs.push_back({it->second, !canonical});
            }
            out.refs[c].push_back(std::move(refs));
        }
    }
    return out;
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

std::vector<int> douglas_peucker(const std::vector<Eigen::Vector2i>& polyline, double epsilon) {
    const int n = int(polyline.size());
    if (n <= 2) {
        std::vector<int> all(std::size_t(std::max(n, 0)));
        for (int i = 0; i < n; ++i) all[std::size_t(i)] = i;
        return all;
    }
    std::vector<std::uint8_t> keep(std::size_t(n), 0);
    keep.front() = keep.back() = 1;
    std::vector<std::pair<int, int>> stack{{0, n - 1}};
    while (!stack.empty()) {
        const auto [lo, hi] = stack.back();
        stack.pop_back();
        const Eigen::Vector2d a = polyline[std::size_t(lo)].cast<double>(), b = polyline[std::size_t(hi)].cast<double>();
        int best = -1;
        double dmax = epsilon;
        for (int i = lo + 1; i < hi; ++i) {
            const double d = point_segment_distance(polyline[std::size_t(i)].cast<double>(), a, b);
            if (d > dmax) {
                dmax = d;
                best = i;
            }
        }
        if (best < 0) continue;
        keep[std::size_t(best)] = 1;
        stack.emplace_back(lo, best);
        stack.emplace_back(best, hi);
    }
    std::vector<int> kept;
    for (int i = 0; i < n; ++i)
        if (keep[std::size_t(i)]) kept.push_back(i);
    return kept;
}

void simplify(Outlines& outlines, double epsilon) {
    auto redo = [&](BoundarySegment& s) {
        s.simplified.clear();
        for (int i : douglas_peucker(s.polyline, s.epsilon)) s.simplified.push_back(s.polyline[std::size_t(i)]);
    };
    parallel_for(0, long(outlines.segments.size()), [&](long i) {
        outlines.segments[std::size_t(i)].epsilon = epsilon;
        redo(outlines.segments[std::size_t(i)]);
    });

    std::vector<int> charts(outlines.polygons.size());
    for (std::size_t c = 0; c < charts.size(); ++c) charts[c] = int(c);
    outlines.refinement_rounds = 0;
    for (;;) {
        std::vector<std::vector<int>> bad(charts.size());
        parallel_for(0, long(charts.size()), [&](long ci) {
            const int c = charts[std::size_t(ci)];
            const auto rings = assemble(outlines, c);
            std::vector<int>& b = bad[std::size_t(ci)];
            std::vector<Ring2d> geometry;
            for (std::size_t r = 0; r < rings.size(); ++r) {
                const bool ok = rings[r].points.size() >= 3 && (signed_area2(rings[r].points) > 0) == (r == 0);
                if (!ok) b.insert(b.end(), rings[r].edge_segment.begin(), rings[r].edge_segment.end());
                geometry.push_back(rings[r].points);
            }
            if (!b.empty()) return;
            for (const auto& [e, f] : find_intersections(geometry, 64)) {
                b.push_back(rings[std::size_t(e.ring)].edge_segment[std::size_t(e.index)]);
                b.push_back(rings[std::size_t(f.ring)].edge_segment[std::size_t(f.index)]);
            }
        });
        std::set<int> offending;
        for (std::size_t ci = 0; ci < charts.size(); ++ci) {
            if (bad[ci].empty()) continue;
            offending.insert(bad[ci].begin(), bad[ci].end());
        }
        if (offending.empty()) return;
        bool changed = false;
        for (int s : offending) {
            BoundarySegment& seg = outlines.segments[std::size_t(s)];
            if (seg.epsilon == 0) continue;
            seg.epsilon = seg.epsilon * 0.5 < 0.25 ? 0.0 : seg.epsilon * 0.5;
            redo(seg);
            changed = true;
        }
        if (!changed) throw GeometryError("chart outline stays invalid after simplification refinement");
        ++outlines.refinement_rounds;
        // only charts touching a changed segment need another look
        std::set<int> touched;
        for (int s : offending) {
            touched.insert(outlines.segments[std::size_t(s)].owner);
            if (outlines.segments[std::size_t(s)].other != kSilhouette) touched.insert(outlines.segments[std::size_t(s)].other);
        }
        charts.assign(touched.begin(), touched.end());
    }
}

std::vector<Ring2d> simplified_rings(const Outlines& outlines, int chart) {
    std::vector<Ring2d> rings;
    for (auto& r : assemble(outlines, chart)) rings.push_back(std::move(r.points));
    return rings;
}

}  // namespace ldiphoto
