#include "ldiphoto/hallucinate.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "ldiphoto/image_io.hpp"

namespace ldiphoto {

namespace {

constexpr std::uint8_t dir_bit(Dir d) { return std::uint8_t(1u << int(d)); }

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    int find(int a) {
        while (parent_[std::size_t(a)] != a) {
            parent_[std::size_t(a)] = parent_[std::size_t(parent_[std::size_t(a)])];
            a = parent_[std::size_t(a)];
        }
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[std::size_t(b)] = a;  // smaller index wins, keeps roots deterministic
    }

private:
    std::vector<int> parent_;
};

// A chain node: one back pixel facing one front surface.
struct Node {
    int back;
    int x, y;
    float back_d;
    float front_d;
    std::uint8_t dirs = 0;
    std::vector<DiscontinuityPixel> edges;
};

struct NodeGraph {
    std::vector<Node> nodes;
    std::vector<std::vector<int>> adj;
};

bool similar(const Node& a, const Node& b, float tau) {
    return std::abs(a.back_d - b.back_d) <= tau && std::abs(a.front_d - b.front_d) <= tau;
}

// Nodes facing strictly opposite directions are two sides of a gap, not one curve.
bool facing_compatible(const Node& a, const Node& b) {
    for (Dir da : kAllDirs) {
        if (!(a.dirs & dir_bit(da))) continue;
        for (Dir db : kAllDirs)
            if ((b.dirs & dir_bit(db)) && db != opposite(da)) return true;
    }
    return false;
}

NodeGraph build_graph(const Ldi& ldi, const std::vector<DiscontinuityPixel>& disc, float tau) {
    NodeGraph g;
    std::vector<DiscontinuityPixel> sorted = disc;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const DiscontinuityPixel& a, const DiscontinuityPixel& b) { return a.back < b.back; });
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        const std::size_t first_node = g.nodes.size();
        while (j < sorted.size() && sorted[j].back == sorted[i].back) {
            const DiscontinuityPixel& e = sorted[j];
            const float fd = ldi.disparity(e.front);
            std::size_t n = first_node;
            while (n < g.nodes.size() && std::abs(g.nodes[n].front_d - fd) > tau) ++n;
            if (n == g.nodes.size()) {
                g.nodes.push_back({e.back, ldi.x(e.back), ldi.y(e.back), ldi.disparity(e.back), fd, 0, {}});
            }
            g.nodes[n].edges.push_back(e);
            g.nodes[n].dirs |= dir_bit(e.dir);
            ++j;
        }
        i = j;
    }

    std::unordered_map<long, std::vector<int>> cells;
    const long w = ldi.width();
    for (std::size_t n = 0; n < g.nodes.size(); ++n) cells[g.nodes[n].y * w + g.nodes[n].x].push_back(int(n));
    auto at = [&](int x, int y) -> const std::vector<int>* {
        if (x < 0 || y < 0 || x >= ldi.width() || y >= ldi.height()) return nullptr;
        auto it = cells.find(y * w + x);
        return it == cells.end() ? nullptr : &it->second;
    };
    auto linked = [&](const Node& a, const Node& b) { return similar(a, b, tau) && facing_compatible(a, b); };

    g.adj.assign(g.nodes.size(), {});
    for (std::size_t u = 0; u < g.nodes.size(); ++u) {
        const Node& a = g.nodes[u];
        for (int oy = -1; oy <= 1; ++oy)
            for (int ox = -1; ox <= 1; ++ox) {
                if (ox == 0 && oy == 0) continue;
                const auto* list = at(a.x + ox, a.y + oy);
                if (!list) continue;
                for (int v : *list) {
                    const Node& b = g.nodes[std::size_t(v)];
                    if (!linked(a, b)) continue;
                    if (ox != 0 && oy != 0) {
                        // Diagonal steps only where no shared 4-neighbor already joins them.
                        bool bridged = false;
                        for (const auto* mid : {at(a.x + ox, a.y), at(a.x, a.y + oy)}) {
                            if (!mid) continue;
                            for (int m : *mid) {
                                const Node& c = g.nodes[std::size_t(m)];
                                if (linked(a, c) && linked(b, c)) bridged = true;
                            }
                        }
                        if (bridged) continue;
                    }
                    g.adj[u].push_back(v);
                }
            }
        std::sort(g.adj[u].begin(), g.adj[u].end());
    }
    return g;
}

struct RawChain {
    std::vector<int> nodes;
    bool closed = false;
};

}  // namespace

std::vector<DiscontinuityPixel> detect_discontinuities(const Ldi& ldi, float tau_disp) {
    const PositionIndex positions(ldi);
    std::vector<DiscontinuityPixel> out;
    for (int k = 0; k < ldi.size(); ++k) {
        for (Dir d : kAllDirs) {
            if (ldi.has_neighbor(k, d)) continue;
            const int qx = ldi.x(k) + dx(d);
            const int qy = ldi.y(k) + dy(d);
            if (qx < 0 || qy < 0 || qx >= ldi.width() || qy >= ldi.height()) continue;
            int front = -1;
            for (int q : positions.at(qx, qy))
                if (front < 0 || ldi.disparity(q) > ldi.disparity(front)) front = q;
            if (front >= 0 && ldi.disparity(front) - ldi.disparity(k) > tau_disp) out.push_back({k, front, d});
        }
    }
    return out;
}

std::vector<CurveGroup> group_into_curves(const Ldi& ldi, const std::vector<DiscontinuityPixel>& disc,
                                          const HallucinateParams& params) {
    const NodeGraph g = build_graph(ldi, disc, params.tau_disp);
    const std::size_t n = g.nodes.size();
    std::vector<std::uint8_t> junction(n, 0);
    for (std::size_t u = 0; u < n; ++u) junction[u] = g.adj[u].size() >= 3;

    auto reduced = [&](int u) {
        std::vector<int> out;
        for (int v : g.adj[std::size_t(u)])
            if (!junction[std::size_t(v)]) out.push_back(v);
        return out;
    };

    // Walk paths from their ends first, then the remaining cycles.
    std::vector<RawChain> chains;
    std::vector<std::uint8_t> visited(n, 0);
    auto walk = [&](int start, bool closed) {
        RawChain c;
        c.closed = closed;
        int prev = -1, cur = start;
        while (cur >= 0 && !visited[std::size_t(cur)]) {
            visited[std::size_t(cur)] = 1;
            c.nodes.push_back(cur);
            int next = -1;
            for (int v : reduced(cur))
                if (v != prev && !visited[std::size_t(v)]) {
                    next = v;
                    break;
                }
            prev = cur;
            cur = next;
        }
        chains.push_back(std::move(c));
    };
    for (std::size_t u = 0; u < n; ++u)
        if (!junction[u] && !visited[u] && reduced(int(u)).size() <= 1) walk(int(u), false);
    for (std::size_t u = 0; u < n; ++u)
        if (!junction[u] && !visited[u]) walk(int(u), true);

    // Junction clusters over chain ends and junction nodes.
    const std::size_t ends = chains.size() * 2;
    DisjointSets sets(ends + n);
    auto end_node = [&](std::size_t c, int e) {
        return e == 0 ? chains[c].nodes.front() : chains[c].nodes.back();
    };
    for (std::size_t u = 0; u < n; ++u) {
        if (!junction[u]) continue;
        for (int v : g.adj[u])
            if (junction[std::size_t(v)]) sets.unite(int(ends + u), int(ends + std::size_t(v)));
    }
    std::unordered_map<long, std::vector<int>> end_cells;
    const long w = ldi.width();
    for (std::size_t c = 0; c < chains.size(); ++c) {
        if (chains[c].closed) continue;
        for (int e = 0; e < 2; ++e) {
            const int node = end_node(c, e);
            for (int v : g.adj[std::size_t(node)])
                if (junction[std::size_t(v)]) sets.unite(int(2 * c + std::size_t(e)), int(ends + std::size_t(v)));
            const Node& nd = g.nodes[std::size_t(node)];
            end_cells[nd.y * w + nd.x].push_back(int(2 * c + std::size_t(e)));
        }
    }
    for (std::size_t c = 0; c < chains.size(); ++c) {
        if (chains[c].closed) continue;
        for (int e = 0; e < 2; ++e) {
            const Node& nd = g.nodes[std::size_t(end_node(c, e))];
            for (int oy = -1; oy <= 1; ++oy)
                for (int ox = -1; ox <= 1; ++ox) {
                    auto it = end_cells.find((nd.y + oy) * w + nd.x + ox);
                    if (it == end_cells.end()) continue;
                    for (int other : it->second)
                        if (std::size_t(other) / 2 != c) sets.unite(int(2 * c + std::size_t(e)), other);
                }
        }
    }
    // Chains and surfaces per cluster.
    std::unordered_map<int, std::vector<std::size_t>> cluster_chains;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        if (chains[c].closed) continue;
        for (int e = 0; e < 2; ++e) {
            auto& list = cluster_chains[sets.find(int(2 * c + std::size_t(e)))];
            if (std::find(list.begin(), list.end(), c) == list.end()) list.push_back(c);
        }
    }

    std::vector<CurveGroup> groups;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        const RawChain& raw = chains[c];
        if (int(raw.nodes.size()) < params.min_group_length) continue;
        CurveGroup group;
        group.closed = raw.closed;
        double back_sum = 0, front_sum = 0;
        for (int node : raw.nodes) {
            const Node& nd = g.nodes[std::size_t(node)];
            group.chain.push_back(nd.edges.front());
            group.edges.insert(group.edges.end(), nd.edges.begin(), nd.edges.end());
            back_sum += nd.back_d;
            front_sum += nd.front_d;
        }
        group.back_disparity = float(back_sum / double(raw.nodes.size()));
        group.front_disparity = float(front_sum / double(raw.nodes.size()));
        if (!raw.closed) {
            for (int e = 0; e < 2; ++e) {
                const int root = sets.find(int(2 * c + std::size_t(e)));
                if (cluster_chains[root].size() >= 3) group.junction[std::size_t(e)] = root;
            }
        }
        groups.push_back(std::move(group));
    }

    // Junction surfaces are needed by derive_constraints; stash them per cluster via the end nodes.
    // Recomputed there from the chain list, so store the distinct surfaces now.
    for (CurveGroup& group : groups) {
        for (int e = 0; e < 2; ++e) {
            const int root = group.junction[std::size_t(e)];
            if (root < 0) continue;
            std::vector<float> surfaces;
            for (std::size_t c : cluster_chains[root]) {
                const int node = chains[c].nodes.front();
                const Node& nd = g.nodes[std::size_t(node)];
                surfaces.push_back(nd.back_d);
                surfaces.push_back(nd.front_d);
            }
            group.junction_surfaces[std::size_t(e)] = std::move(surfaces);
        }
    }
    return groups;
}

std::vector<CurveGroup> derive_constraints(const Ldi& ldi, std::vector<CurveGroup> groups,
                                           const HallucinateParams& params) {
    const float tau = params.tau_disp;
    for (CurveGroup& group : groups) {
        group.constraints = {std::nullopt, std::nullopt};
        if (group.closed || group.chain.size() < 2) continue;
        for (int e = 0; e < 2; ++e) {
            if (group.junction[std::size_t(e)] >= 0) {
                // Distinct surfaces meeting here, nearest last.
                std::vector<float> s = group.junction_surfaces[std::size_t(e)];
                std::sort(s.begin(), s.end());
                std::vector<float> distinct;
                for (float v : s)
                    if (distinct.empty() || v - distinct.back() > tau) distinct.push_back(v);
                if (distinct.size() >= 3) {
                    // Keep only the curve whose back side is a middle surface.
                    const bool middle = group.back_disparity - distinct.front() > tau &&
                                        distinct.back() - group.back_disparity > tau;
                    if (!middle) continue;
                }
            }
            const std::size_t count = std::min<std::size_t>(std::size_t(params.tangent_window), group.chain.size());
            Eigen::Matrix2Xd pts(2, Eigen::Index(count));
            for (std::size_t i = 0; i < count; ++i) {
                const int k = e == 0 ? group.chain[i].back : group.chain[group.chain.size() - 1 - i].back;
                pts.col(Eigen::Index(i)) = Eigen::Vector2d(ldi.x(k), ldi.y(k));
            }
            const Eigen::Vector2d end = pts.col(0);
            const Eigen::Vector2d mean = pts.rowwise().mean();
            const Eigen::Matrix2Xd centered = pts.colwise() - mean;
            const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(centered * centered.transpose());
            Eigen::Vector2d tangent = eig.eigenvectors().col(1);
            const Eigen::Vector2d inward = mean - end;
            if (inward.squaredNorm() < 1e-12) continue;
            if (tangent.dot(inward) < 0) tangent = -tangent;
            group.constraints[std::size_t(e)] = ConstraintLine{end, tangent.normalized()};
        }
    }
    return groups;
}

Ldi expand(const Ldi& input, const std::vector<CurveGroup>& groups, const HallucinateParams& params,
           ExpansionTrace* trace) {
    Ldi ldi = input;
    const float tau = params.tau_disp;
    const int w = ldi.width();
    const int h = ldi.height();

    std::vector<int> cell_head(std::size_t(w) * h, -1);
    std::vector<int> next_in_cell(std::size_t(ldi.size()), -1);
    std::vector<int> creator(std::size_t(ldi.size()), -1);
    auto add_to_cell = [&](int k) {
        const std::size_t cell = std::size_t(ldi.y(k)) * w + ldi.x(k);
        next_in_cell[std::size_t(k)] = cell_head[cell];
        cell_head[cell] = k;
    };
    for (int k = ldi.size() - 1; k >= 0; --k) add_to_cell(k);

    DisjointSets merged(groups.size());
    std::unordered_map<int, std::vector<int>> chain_groups;  // original pixel -> groups it seeds
    std::vector<std::vector<std::pair<int, std::uint8_t>>> wave(groups.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        std::unordered_map<int, std::uint8_t> dirs;
        for (const DiscontinuityPixel& e : groups[gi].edges) dirs[e.back] |= dir_bit(e.dir);
        for (const DiscontinuityPixel& e : groups[gi].chain) {
            auto it = dirs.find(e.back);
            if (it == dirs.end()) continue;
            wave[gi].push_back({e.back, it->second});
            auto& list = chain_groups[e.back];
            if (std::find(list.begin(), list.end(), int(gi)) == list.end()) list.push_back(int(gi));
            dirs.erase(it);
        }
    }

    auto is_member = [&](int k, int root) {
        if (creator[std::size_t(k)] >= 0) return merged.find(creator[std::size_t(k)]) == root;
        auto it = chain_groups.find(k);
        if (it == chain_groups.end()) return false;
        for (int g : it->second)
            if (merged.find(g) == root) return true;
        return false;
    };
    auto allowed = [&](std::size_t gi, int x, int y) {
        for (const auto& c : groups[gi].constraints)
            if (c && c->signed_distance(Eigen::Vector2d(x, y)) < -1e-9) return false;
        return true;
    };

    struct Proposal {
        long cell;
        int group;
        int proposer;
        Dir dir;
    };
    std::vector<Proposal> props;
    std::vector<std::pair<int, int>> merges;

    for (int iter = 0; iter < params.iterations; ++iter) {
        props.clear();
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            for (const auto& [p, mask] : wave[gi]) {
                for (Dir d : kAllDirs) {
                    if (!(mask & dir_bit(d)) || ldi.has_neighbor(p, d)) continue;
                    const int qx = ldi.x(p) + dx(d);
                    const int qy = ldi.y(p) + dy(d);
                    if (qx < 0 || qy < 0 || qx >= w || qy >= h || !allowed(gi, qx, qy)) continue;
                    props.push_back({long(qy) * w + qx, int(gi), p, d});
                }
            }
        }
        std::sort(props.begin(), props.end(), [](const Proposal& a, const Proposal& b) {
            return std::tie(a.cell, a.group, a.proposer) < std::tie(b.cell, b.group, b.proposer);
        });

        std::vector<std::vector<std::pair<int, std::uint8_t>>> next_wave(groups.size());
        std::vector<std::pair<int, int>> pending_merges;
        int created = 0;
        for (std::size_t i = 0; i < props.size();) {
            std::size_t j = i;
            while (j < props.size() && props[j].cell == props[i].cell && props[j].group == props[i].group) ++j;
            const int gi = props[i].group;
            const int root = merged.find(gi);
            const int qx = int(props[i].cell % w);
            const int qy = int(props[i].cell / w);

            double sum = 0;
            int count = 0;
            for (std::size_t t = i; t < j; ++t) {
                if (t > i && props[t].proposer == props[t - 1].proposer) continue;
                sum += ldi.disparity(props[t].proposer);
                ++count;
            }
            const float mean = float(sum / count);

            // Same surface already present here: connect to it instead of duplicating.
            int same = -1;
            float max_d = -1.0f;
            for (int s = cell_head[std::size_t(props[i].cell)]; s >= 0; s = next_in_cell[std::size_t(s)]) {
                max_d = std::max(max_d, ldi.disparity(s));
                const float diff = std::abs(ldi.disparity(s) - mean);
                if (diff <= tau && (same < 0 || diff < std::abs(ldi.disparity(same) - mean) ||
                                    (diff == std::abs(ldi.disparity(same) - mean) && s < same)))
                    same = s;
            }
            if (same >= 0) {
                const int other = creator[std::size_t(same)];
                if (other >= 0 && merged.find(other) != root) pending_merges.push_back({gi, other});
                for (std::size_t t = i; t < j; ++t) {
                    const int p = props[t].proposer;
                    const Dir d = props[t].dir;
                    if (!ldi.has_neighbor(p, d) && !ldi.has_neighbor(same, opposite(d)) &&
                        std::abs(ldi.disparity(p) - ldi.disparity(same)) <= tau)
                        ldi.link(p, d, same);
                }
                i = j;
                continue;
            }
            if (!(mean < max_d)) {
                i = j;
                continue;
            }

            const int k = ldi.add_pixel(qx, qy, mean, false);
            next_in_cell.push_back(-1);
            creator.push_back(gi);
            add_to_cell(k);
            ++created;
            for (Dir d : kAllDirs) {
                const int nx = qx + dx(d);
                const int ny = qy + dy(d);
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                int best = -1;
                float best_diff = 0;
                for (int t = cell_head[std::size_t(ny) * w + nx]; t >= 0; t = next_in_cell[std::size_t(t)]) {
                    if (ldi.has_neighbor(t, opposite(d)) || !is_member(t, root)) continue;
                    const float diff = std::abs(ldi.disparity(t) - mean);
                    if (diff > tau) continue;
                    if (best < 0 || diff < best_diff || (diff == best_diff && t < best)) {
                        best = t;
                        best_diff = diff;
                    }
                }
                if (best >= 0) ldi.link(k, d, best);
            }
            next_wave[std::size_t(gi)].push_back({k, std::uint8_t(0xF)});
            i = j;
        }
        for (const auto& [a, b] : pending_merges) {
            if (merged.find(a) != merged.find(b)) {
                merged.unite(a, b);
                merges.push_back({a, b});
            }
        }
        wave = std::move(next_wave);
        if (trace) trace->created_per_iteration.push_back(created);
    }
    if (trace) {
        trace->creator = std::move(creator);
        trace->merges = std::move(merges);
    }
    return ldi;
}

Ldi hallucinate(const Ldi& ldi, const HallucinateParams& params, ExpansionTrace* trace,
                std::vector<CurveGroup>* groups_out) {
    const auto disc = detect_discontinuities(ldi, params.tau_disp);
    auto groups = derive_constraints(ldi, group_into_curves(ldi, disc, params), params);
    Ldi out = expand(ldi, groups, params, trace);
    if (groups_out) *groups_out = std::move(groups);
    return out;
}

void dump_layers(const Ldi& ldi, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const PositionIndex positions(ldi);
    const int layers = positions.max_layers();
    for (int l = 0; l < layers; ++l) {
        Imagef color(ldi.width(), ldi.height(), 3);
        Imagef disp(ldi.width(), ldi.height(), 1);
        for (int y = 0; y < ldi.height(); ++y)
            for (int x = 0; x < ldi.width(); ++x) {
                const auto ids = positions.at(x, y);
                if (std::ssize(ids) <= l) continue;
                const int k = ids[std::size_t(l)];
                if (ldi.known(k) && ldi.color_channels() >= 3)
                    color.pixel(x, y) = ldi.color(k).head<3>();
                else
                    color.pixel(x, y) = Eigen::Vector3f(1, 0, 1);
                disp(x, y) = ldi.disparity(k);
            }
        io::write_png(dir / ("layer_" + std::to_string(l) + ".png"), color);
        io::write_png(dir / ("layer_" + std::to_string(l) + "_disp.png"), disp);
    }
}

}  // namespace ldiphoto
