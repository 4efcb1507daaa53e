#include "ldiphoto/triangulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "ldiphoto/error.hpp"

namespace ldiphoto {

namespace {

using Vec2 = Eigen::Vector2d;

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// c is known to be collinear with [a, b]
bool on_segment(const Vec2& a, const Vec2& b, const Vec2& c) {
    return std::min(a.x(), b.x()) <= c.x() && c.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= c.y() &&
           c.y() <= std::max(a.y(), b.y());
}

bool segments_meet(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    const double d1 = orient(q1, q2, p1), d2 = orient(q1, q2, p2);
    const double d3 = orient(p1, p2, q1), d4 = orient(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    if (d1 == 0 && on_segment(q1, q2, p1)) return true;
    if (d2 == 0 && on_segment(q1, q2, p2)) return true;
    if (d3 == 0 && on_segment(p1, p2, q1)) return true;
    if (d4 == 0 && on_segment(p1, p2, q2)) return true;
    return false;
}

// p above q: larger y, ties broken by smaller x
bool above(const Vec2& p, const Vec2& q) { return p.y() > q.y() || (p.y() == q.y() && p.x() < q.x()); }

std::uint64_t edge_key(int a, int b) { return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b); }

std::uint64_t undirected_key(int a, int b) { return edge_key(std::min(a, b), std::max(a, b)); }

struct Polygon {
    std::vector<Vec2> v;
    std::vector<int> next, prev;
};

Polygon flatten(const std::vector<Ring2d>& rings) {
    Polygon poly;
    for (const Ring2d& ring : rings) {
        const int base = int(poly.v.size()), n = int(ring.size());
        for (int i = 0; i < n; ++i) {
            poly.v.push_back(ring[std::size_t(i)]);
            poly.next.push_back(base + (i + 1) % n);
            poly.prev.push_back(base + (i + n - 1) % n);
        }
    }
    return poly;
}

enum class VertexType { Start, End, Split, Merge, Regular };

// Diagonals that split the polygon into y-monotone pieces.
std::vector<std::pair<int, int>> monotone_diagonals(const Polygon& poly) {
    const int n = int(poly.v.size());
    std::vector<VertexType> type(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Vec2 &p = poly.v[std::size_t(poly.prev[std::size_t(i)])], &c = poly.v[std::size_t(i)],
                   &q = poly.v[std::size_t(poly.next[std::size_t(i)])];
        const bool pb = above(c, p), qb = above(c, q);
        const bool convex = orient(p, c, q) > 0;
        if (pb && qb) type[std::size_t(i)] = convex ? VertexType::Start : VertexType::Split;
        else if (!pb && !qb) type[std::size_t(i)] = convex ? VertexType::End : VertexType::Merge;
        else type[std::size_t(i)] = VertexType::Regular;
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return above(poly.v[std::size_t(a)], poly.v[std::size_t(b)]);
    });

    // status: edges e_i = (i, next(i)) with the interior on their right, in no particular order
    std::vector<int> status;
    std::vector<int> helper(static_cast<std::size_t>(n), -1);
    std::vector<std::pair<int, int>> diagonals;

    auto x_at = [&](int e, double y) {
        const Vec2 &a = poly.v[std::size_t(e)], &b = poly.v[std::size_t(poly.next[std::size_t(e)])];
        if (a.y() == b.y()) return std::max(a.x(), b.x());
        return a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
    };
    auto left_of = [&](int vi) {
        const Vec2& p = poly.v[std::size_t(vi)];
        int best = -1;
        double best_x = -std::numeric_limits<double>::infinity();
        for (int e : status) {
            const double x = x_at(e, p.y());
            if (x < p.x() && x > best_x) {
                best_x = x;
                best = e;
            }
        }
        if (best < 0) throw GeometryError("monotone sweep: no edge left of vertex " + std::to_string(vi));
        return best;
    };
    auto erase = [&](int e) {
        auto it = std::find(status.begin(), status.end(), e);
        if (it != status.end()) status.erase(it);
    };
    auto fix_up = [&](int vi, int e) {
        const int h = helper[std::size_t(e)];
        if (h >= 0 && type[std::size_t(h)] == VertexType::Merge) diagonals.emplace_back(vi, h);
    };

    for (int vi : order) {
        const int ep = poly.prev[std::size_t(vi)];
        switch (type[std::size_t(vi)]) {
        case VertexType::Start:
            status.push_back(vi);
            helper[std::size_t(vi)] = vi;
            break;
        case VertexType::End:
            fix_up(vi, ep);
            erase(ep);
            break;
        case VertexType::Split: {
            const int ej = left_of(vi);
            diagonals.emplace_back(vi, helper[std::size_t(ej)]);
            helper[std::size_t(ej)] = vi;
            status.push_back(vi);
            helper[std::size_t(vi)] = vi;
            break;
        }
        case VertexType::Merge: {
            fix_up(vi, ep);
            erase(ep);
            const int ej = left_of(vi);
            fix_up(vi, ej);
            helper[std::size_t(ej)] = vi;
            break;
        }
        case VertexType::Regular:
            if (above(poly.v[std::size_t(ep)], poly.v[std::size_t(vi)])) {
                fix_up(vi, ep);
                erase(ep);
                status.push_back(vi);
                helper[std::size_t(vi)] = vi;
            } else {
                const int ej = left_of(vi);
                fix_up(vi, ej);
                helper[std::size_t(ej)] = vi;
            }
            break;
        }
    }
    return diagonals;
}

// Faces of the polygon cut by diagonals, each counterclockwise.
std::vector<std::vector<int>> split_faces(const Polygon& poly, const std::vector<std::pair<int, int>>& diagonals) {
    const int n = int(poly.v.size());
    std::vector<std::vector<int>> nbr(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        nbr[std::size_t(i)].push_back(poly.next[std::size_t(i)]);
        nbr[std::size_t(i)].push_back(poly.prev[std::size_t(i)]);
    }
    std::vector<std::pair<int, int>> starts;
    for (int i = 0; i < n; ++i) starts.emplace_back(i, poly.next[std::size_t(i)]);
    for (auto [a, b] : diagonals) {
        nbr[std::size_t(a)].push_back(b);
        nbr[std::size_t(b)].push_back(a);
        starts.emplace_back(a, b);
        starts.emplace_back(b, a);
    }
    for (int i = 0; i < n; ++i) {
        auto& list = nbr[std::size_t(i)];
        const Vec2 c = poly.v[std::size_t(i)];
        std::vector<std::pair<double, int>> ang;
        for (int j : list) {
            const Vec2 d = poly.v[std::size_t(j)] - c;
            ang.emplace_back(std::atan2(d.y(), d.x()), j);
        }
        std::sort(ang.begin(), ang.end());
        for (std::size_t k = 0; k < list.size(); ++k) list[k] = ang[k].second;
    }
    std::unordered_set<std::uint64_t> used;
    std::vector<std::vector<int>> faces;
    for (auto [a0, b0] : starts) {
        if (used.count(edge_key(a0, b0))) continue;
        std::vector<int> face;
        int a = a0, b = b0;
        for (int guard = 0; guard <= 2 * n + 2 * int(diagonals.size()); ++guard) {
            used.insert(edge_key(a, b));
            face.push_back(a);
            const auto& list = nbr[std::size_t(b)];
            const auto pos = std::find(list.begin(), list.end(), a) - list.begin();
            const int c = list[std::size_t((pos + int(list.size()) - 1) % int(list.size()))];
            a = b;
            b = c;
            if (a == a0 && b == b0) break;
        }
        faces.push_back(std::move(face));
    }
    return faces;
}

// Stack triangulation of a counterclockwise y-monotone face.
void triangulate_monotone(const Polygon& poly, const std::vector<int>& face, std::vector<Eigen::Vector3i>& out) {
    const int m = int(face.size());
    if (m < 3) return;
    auto pt = [&](int v) -> const Vec2& { return poly.v[std::size_t(v)]; };
    int top = 0, bottom = 0;
    for (int i = 1; i < m; ++i) {
        if (above(pt(face[std::size_t(i)]), pt(face[std::size_t(top)]))) top = i;
        if (above(pt(face[std::size_t(bottom)]), pt(face[std::size_t(i)]))) bottom = i;
    }
    // left chain: counterclockwise from top to bottom
    std::unordered_map<int, bool> left;
    for (int i = top; i != bottom; i = (i + 1) % m) left[face[std::size_t(i)]] = true;
    for (int i = bottom; i != top; i = (i + 1) % m) left[face[std::size_t(i)]] = false;
    left[face[std::size_t(bottom)]] = false;

    std::vector<int> u = face;
    std::sort(u.begin(), u.end(), [&](int a, int b) { return above(pt(a), pt(b)); });
    auto emit = [&](int a, int b, int c) {
        if (orient(pt(a), pt(b), pt(c)) < 0) std::swap(b, c);
        out.emplace_back(a, b, c);
    };
    std::vector<int> stack{u[0], u[1]};
    for (int j = 2; j < m - 1; ++j) {
        const int uj = u[std::size_t(j)];
        if (left[uj] != left[stack.back()]) {
            while (stack.size() > 1) {
                const int v = stack.back();
                stack.pop_back();
                emit(uj, v, stack.back());
            }
            stack.clear();
            stack.push_back(u[std::size_t(j - 1)]);
            stack.push_back(uj);
        } else {
            int last = stack.back();
            stack.pop_back();
            while (!stack.empty()) {
                const int w = stack.back();
                const bool inside = left[uj] ? orient(pt(w), pt(last), pt(uj)) > 0 : orient(pt(uj), pt(last), pt(w)) > 0;
                if (!inside) break;
                emit(uj, last, w);
                last = w;
                stack.pop_back();
            }
            stack.push_back(last);
            stack.push_back(uj);
        }
    }
    const int un = u[std::size_t(m - 1)];
    while (stack.size() > 1) {
        const int v = stack.back();
        stack.pop_back();
        emit(un, v, stack.back());
    }
}

double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double ad = adx * adx + ady * ady, bd = bdx * bdx + bdy * bdy, cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

// Triangle soup with directed-edge adjacency.
class Mesh {
public:
    Mesh(std::vector<Vec2>& v, std::vector<Eigen::Vector3i>& t, const std::unordered_set<std::uint64_t>& constrained)
        : v_(v), t_(t), constrained_(constrained) {
        for (int i = 0; i < int(t_.size()); ++i) link(i);
    }

    int across(int a, int b) const {
        auto it = edges_.find(edge_key(b, a));
        return it == edges_.end() ? -1 : it->second;
    }

    static int third(const Eigen::Vector3i& t, int a, int b) {
        for (int k = 0; k < 3; ++k)
            if (t[k] != a && t[k] != b) return t[k];
        return -1;
    }

    void set(int ti, int a, int b, int c) {
        unlink(ti);
        t_[std::size_t(ti)] = Eigen::Vector3i(a, b, c);
        link(ti);
    }

    int add(int a, int b, int c) {
        t_.emplace_back(a, b, c);
        link(int(t_.size()) - 1);
        return int(t_.size()) - 1;
    }

    // Flip the edge a->b of triangle t1 = (a, b, c) with its neighbor (b, a, d).
    void flip(int t1, int a, int b) {
        const int t2 = across(a, b);
        const int c = third(t_[std::size_t(t1)], a, b), d = third(t_[std::size_t(t2)], a, b);
        unlink(t1);
        unlink(t2);
        t_[std::size_t(t1)] = Eigen::Vector3i(c, a, d);
        t_[std::size_t(t2)] = Eigen::Vector3i(d, b, c);
        link(t1);
        link(t2);
    }

    bool is_constrained(int a, int b) const { return constrained_.count(undirected_key(a, b)) != 0; }

    // Triangle holding p on its left-rotated edge a->b, with p as the third vertex.
    int tri_of(int a, int b) const {
        auto it = edges_.find(edge_key(a, b));
        return it == edges_.end() ? -1 : it->second;
    }

    void legalize(int p, std::vector<std::pair<int, int>> todo) {
        while (!todo.empty()) {
            auto [a, b] = todo.back();
            todo.pop_back();
            if (is_constrained(a, b)) continue;
            const int t1 = tri_of(a, b), t2 = across(a, b);
            if (t1 < 0 || t2 < 0) continue;
            const int d = third(t_[std::size_t(t2)], a, b);
            const Vec2 &pa = v_[std::size_t(a)], &pb = v_[std::size_t(b)], &pp = v_[std::size_t(p)], &pd = v_[std::size_t(d)];
            if (incircle(pa, pb, pp, pd) <= 0) continue;
            if (orient(pp, pa, pd) <= 0 || orient(pd, pb, pp) <= 0) continue;
            flip(t1, a, b);
            todo.emplace_back(a, d);
            todo.emplace_back(d, b);
        }
    }

private:
    void link(int ti) {
        const auto& t = t_[std::size_t(ti)];
        for (int k = 0; k < 3; ++k) edges_[edge_key(t[k], t[(k + 1) % 3])] = ti;
    }
    void unlink(int ti) {
        const auto& t = t_[std::size_t(ti)];
        for (int k = 0; k < 3; ++k) {
            auto it = edges_.find(edge_key(t[k], t[(k + 1) % 3]));
            if (it != edges_.end() && it->second == ti) edges_.erase(it);
        }
    }

    std::vector<Vec2>& v_;
    std::vector<Eigen::Vector3i>& t_;
    const std::unordered_set<std::uint64_t>& constrained_;
    std::unordered_map<std::uint64_t, int> edges_;
};

void remove_degenerate(std::vector<Vec2>& v, std::vector<Eigen::Vector3i>& tris, Mesh& mesh) {
    for (int pass = 0; pass < 4 * int(tris.size()) + 4; ++pass) {
        bool changed = false;
        for (int ti = 0; ti < int(tris.size()); ++ti) {
            const Eigen::Vector3i t = tris[std::size_t(ti)];
            if (orient(v[std::size_t(t[0])], v[std::size_t(t[1])], v[std::size_t(t[2])]) != 0) continue;
            // flip the longest edge; its opposite vertex lies on it
            int best = 0;
            double len = -1;
            for (int k = 0; k < 3; ++k) {
                const double l = (v[std::size_t(t[(k + 1) % 3])] - v[std::size_t(t[k])]).squaredNorm();
                if (l > len) {
                    len = l;
                    best = k;
                }
            }
            const int a = t[best], b = t[(best + 1) % 3];
            if (mesh.is_constrained(a, b) || mesh.across(a, b) < 0)
                throw GeometryError("degenerate triangle on a boundary edge");
            mesh.flip(ti, a, b);
            changed = true;
        }
        if (!changed) return;
    }
    throw GeometryError("could not remove degenerate triangles");
}

void insert_point(std::vector<Vec2>& v, std::vector<Eigen::Vector3i>& tris, Mesh& mesh, const Vec2& p,
                  int& dropped) {
    const double tol = 1e-9;
    for (int ti = 0; ti < int(tris.size()); ++ti) {
        const Eigen::Vector3i t = tris[std::size_t(ti)];
        const Vec2 &a = v[std::size_t(t[0])], &b = v[std::size_t(t[1])], &c = v[std::size_t(t[2])];
        const double o[3] = {orient(a, b, p), orient(b, c, p), orient(c, a, p)};
        if (o[0] < -tol || o[1] < -tol || o[2] < -tol) continue;
        int zero = -1, zeros = 0;
        for (int k = 0; k < 3; ++k)
            if (o[k] <= tol) {
                zero = k;
                ++zeros;
            }
        if (zeros > 1) {
            ++dropped;  // on an existing vertex
            return;
        }
        const int pi = int(v.size());
        v.push_back(p);
        if (zeros == 0) {
            const int i = t[0], j = t[1], k = t[2];
            mesh.set(ti, i, j, pi);
            mesh.add(j, k, pi);
            mesh.add(k, i, pi);
            mesh.legalize(pi, {{i, j}, {j, k}, {k, i}});
            return;
        }
        const int ea = t[zero], eb = t[(zero + 1) % 3], ec = t[(zero + 2) % 3];
        const int t2 = mesh.across(ea, eb);
        if (mesh.is_constrained(ea, eb) || t2 < 0) {
            v.pop_back();
            ++dropped;
            return;
        }
        const int d = Mesh::third(tris[std::size_t(t2)], ea, eb);
        mesh.set(ti, ea, pi, ec);
        mesh.add(pi, eb, ec);
        mesh.set(t2, eb, pi, d);
        mesh.add(pi, ea, d);
        mesh.legalize(pi, {{ec, ea}, {eb, ec}, {d, eb}, {ea, d}});
        return;
    }
    ++dropped;
}

}  // namespace

double signed_area2(const Ring2d& ring) {
    double s = 0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
        const Vec2 &a = ring[i], &b = ring[(i + 1) % ring.size()];
        s += a.x() * b.y() - b.x() * a.y();
    }
    return s;
}

std::vector<std::pair<EdgeRef, EdgeRef>> find_intersections(const std::vector<Ring2d>& rings, std::size_t limit) {
    struct Edge {
        EdgeRef ref;
        Vec2 a, b;
        double lo, hi;
    };
    std::vector<Edge> edges;
    for (int r = 0; r < int(rings.size()); ++r) {
        const Ring2d& ring = rings[std::size_t(r)];
        for (int i = 0; i < int(ring.size()); ++i) {
            const Vec2 &a = ring[std::size_t(i)], &b = ring[std::size_t((i + 1) % int(ring.size()))];
            edges.push_back({{r, i}, a, b, std::min(a.x(), b.x()), std::max(a.x(), b.x())});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& p, const Edge& q) {
        return p.lo < q.lo || (p.lo == q.lo && (p.ref.ring < q.ref.ring || (p.ref.ring == q.ref.ring && p.ref.index < q.ref.index)));
    });
    std::vector<std::pair<EdgeRef, EdgeRef>> found;
    for (std::size_t i = 0; i < edges.size() && found.size() < limit; ++i) {
        const Edge& e = edges[i];
        for (std::size_t j = i + 1; j < edges.size() && edges[j].lo <= e.hi; ++j) {
            const Edge& f = edges[j];
            if (std::max(e.a.y(), e.b.y()) < std::min(f.a.y(), f.b.y()) ||
                std::max(f.a.y(), f.b.y()) < std::min(e.a.y(), e.b.y()))
                continue;
            bool hit;
            const int n = int(rings[std::size_t(e.ref.ring)].size());
            const bool same = e.ref.ring == f.ref.ring;
            const bool e_then_f = same && (e.ref.index + 1) % n == f.ref.index;
            const bool f_then_e = same && (f.ref.index + 1) % n == e.ref.index;
            if (e_then_f || f_then_e) {
                // consecutive edges share a vertex; only a fold back onto each other counts
                const Edge& first = e_then_f ? e : f;
                const Edge& second = e_then_f ? f : e;
                const Vec2 shared = first.b, p = first.a, q = second.b;
                hit = orient(p, shared, q) == 0 && (p - shared).dot(q - shared) > 0;
                if (n <= 2) hit = true;
            } else {
                hit = segments_meet(e.a, e.b, f.a, f.b);
            }
            if (hit) {
                EdgeRef x = e.ref, y = f.ref;
                if (y.ring < x.ring || (y.ring == x.ring && y.index < x.index)) std::swap(x, y);
                found.emplace_back(x, y);
                if (found.size() >= limit) break;
            }
        }
    }
    return found;
}

Triangulation triangulate(const std::vector<Ring2d>& rings, const std::vector<Eigen::Vector2d>& steiner) {
    if (rings.empty()) return {};
    for (std::size_t r = 0; r < rings.size(); ++r)
        if (rings[r].size() < 3) throw GeometryError("ring " + std::to_string(r) + " has fewer than 3 vertices");
    const auto bad = find_intersections(rings, 1);
    if (!bad.empty()) {
        const auto& [e, f] = bad.front();
        throw GeometryError("self-intersecting polygon: segment " + std::to_string(e.ring) + ":" +
                            std::to_string(e.index) + " meets segment " + std::to_string(f.ring) + ":" +
                            std::to_string(f.index));
    }
    Polygon poly = flatten(rings);
    Triangulation out;
    out.boundary_vertices = int(poly.v.size());

    const auto diagonals = monotone_diagonals(poly);
    for (const auto& face : split_faces(poly, diagonals)) triangulate_monotone(poly, face, out.triangles);

    std::unordered_set<std::uint64_t> constrained;
    for (int i = 0; i < int(poly.v.size()); ++i) constrained.insert(undirected_key(i, poly.next[std::size_t(i)]));
    out.vertices = poly.v;
    Mesh mesh(out.vertices, out.triangles, constrained);
    remove_degenerate(out.vertices, out.triangles, mesh);
    for (const Vec2& p : steiner) insert_point(out.vertices, out.triangles, mesh, p, out.dropped_points);
    return out;
}

}  // namespace ldiphoto
