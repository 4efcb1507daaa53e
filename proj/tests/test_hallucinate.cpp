#include <doctest.h>

#include <set>

#include "ldiphoto/hallucinate.hpp"
#include "ldiphoto/synthetic.hpp"
#include "support.hpp"

using namespace ldiphoto;

namespace {

Ldi lift(const DisparityImage::Array& a, std::uint32_t seed = 1) {
    std::mt19937 rng(seed);
    const DisparityImage d(a);
    return lift_to_ldi(testing::random_image(d.width(), d.height(), rng), d, 0.05f);
}

DisparityImage::Array vertical_step(int w, int h, int at, float left, float right) {
    DisparityImage::Array a(h, w);
    a.leftCols(at).setConstant(left);
    a.rightCols(w - at).setConstant(right);
    return a;
}

// (x, y) of every chain pixel
std::set<std::pair<int, int>> chain_cells(const Ldi& ldi, const CurveGroup& g) {
    std::set<std::pair<int, int>> s;
    for (const DiscontinuityPixel& e : g.chain) s.insert({ldi.x(e.back), ldi.y(e.back)});
    return s;
}

struct Audit {
    int created = 0;
    int not_hidden = 0;
    int constraint_violations = 0;
};

Audit audit(const Ldi& out, const ExpansionTrace& trace, const std::vector<CurveGroup>& groups) {
    Audit a;
    const PositionIndex pos(out);
    for (int k = 0; k < out.size(); ++k) {
        const int g = trace.creator[std::size_t(k)];
        if (g < 0) continue;
        ++a.created;
        bool hidden = false;
        for (int q : pos.at(out.x(k), out.y(k))) hidden |= out.disparity(q) > out.disparity(k);
        a.not_hidden += hidden ? 0 : 1;
        for (const auto& c : groups[std::size_t(g)].constraints)
            if (c && c->signed_distance(Eigen::Vector2d(out.x(k), out.y(k))) < 0) ++a.constraint_violations;
    }
    return a;
}

}  // namespace

TEST_CASE("detect: a fully connected LDI has no discontinuities") {
    CHECK(detect_discontinuities(lift(DisparityImage::Array::Constant(16, 16, 0.4f)), 0.05f).empty());
}

TEST_CASE("detect: a step edge gives one entry per row on the far side") {
    const int h = 24;
    const Ldi ldi = lift(vertical_step(32, h, 16, 0.2f, 0.8f));
    const auto disc = detect_discontinuities(ldi, 0.05f);
    REQUIRE(disc.size() == std::size_t(h));
    for (const DiscontinuityPixel& e : disc) {
        CHECK(e.dir == Dir::Right);
        CHECK(ldi.x(e.back) == 15);
        CHECK(ldi.x(e.front) == 16);
        CHECK(ldi.y(e.front) == ldi.y(e.back));
    }
}

TEST_CASE("detect: entries match an exhaustive scan of adjacent pairs") {
    std::mt19937 rng(31);
    for (int t = 0; t < 10; ++t) {
        const DisparityImage d = t % 2 ? testing::random_blocks(20, 16, rng) : testing::random_disparity(20, 16, rng);
        const Ldi ldi = lift_to_ldi(testing::random_image(20, 16, rng), d, 0.05f);
        std::set<std::tuple<int, int, int>> want, got;  // (back, front, dir)
        const int w = 20;
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < w; ++x)
                for (Dir dir : kAllDirs) {
                    const int nx = x + dx(dir), ny = y + dy(dir);
                    if (!d.contains(nx, ny)) continue;
                    if (d(nx, ny) - d(x, y) > 0.05f) want.insert({y * w + x, ny * w + nx, int(dir)});
                }
        for (const DiscontinuityPixel& e : detect_discontinuities(ldi, 0.05f)) got.insert({e.back, e.front, int(e.dir)});
        CHECK(got == want);
    }
}

TEST_CASE("group: a straight edge of length 64 is one group") {
    const Ldi ldi = lift(vertical_step(48, 64, 20, 0.2f, 0.8f));
    const HallucinateParams p;
    const auto groups = group_into_curves(ldi, detect_discontinuities(ldi, p.tau_disp), p);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].chain.size() == 64);
    CHECK(!groups[0].closed);
}

TEST_CASE("group: curves shorter than 20 pixels are pruned") {
    const HallucinateParams p;
    for (int len : {19, 20}) {
        const Ldi ldi = lift(vertical_step(32, len, 10, 0.2f, 0.8f));
        const auto groups = group_into_curves(ldi, detect_discontinuities(ldi, p.tau_disp), p);
        CHECK(groups.size() == (len < 20 ? 0u : 1u));
    }
}

TEST_CASE("group: a T-junction splits into three groups with the midground end constrained") {
    // far 0.2 top-left, mid 0.5 top-right, fore 0.8 along the bottom; each boundary is 40 long
    DisparityImage::Array a(80, 80);
    a.block(0, 0, 40, 40).setConstant(0.2f);
    a.block(0, 40, 40, 40).setConstant(0.5f);
    a.block(40, 0, 40, 80).setConstant(0.8f);
    const Ldi ldi = lift(a);
    const HallucinateParams p;
    auto groups = group_into_curves(ldi, detect_discontinuities(ldi, p.tau_disp), p);
    REQUIRE(groups.size() == 3);
    for (const CurveGroup& g : groups) {
        CHECK(g.chain.size() >= 35);
        CHECK(g.chain.size() <= 40);
        // one back surface and one front surface per group: never across the junction
        for (const DiscontinuityPixel& e : g.chain) {
            CHECK(std::abs(ldi.disparity(e.back) - g.back_disparity) < 1e-6f);
            CHECK(std::abs(ldi.disparity(e.front) - g.front_disparity) < 1e-6f);
        }
        CHECK((g.junction[0] >= 0) != (g.junction[1] >= 0));
    }
    groups = derive_constraints(ldi, groups, p);
    int mid_constrained = 0, back_unconstrained = 0;
    for (const CurveGroup& g : groups) {
        const int j = g.junction[0] >= 0 ? 0 : 1;
        CHECK(g.constraints[std::size_t(1 - j)].has_value());  // free end at the border
        if (std::abs(g.back_disparity - 0.5f) < 1e-6f) mid_constrained += g.constraints[std::size_t(j)].has_value();
        else back_unconstrained += !g.constraints[std::size_t(j)].has_value();
    }
    CHECK(mid_constrained == 1);
    CHECK(back_unconstrained == 2);
}

TEST_CASE("constraints: isolated straight curve gets perpendiculars at both ends") {
    const Ldi ldi = lift(vertical_step(40, 30, 20, 0.2f, 0.8f));
    const HallucinateParams p;
    const auto groups = derive_constraints(ldi, group_into_curves(ldi, detect_discontinuities(ldi, p.tau_disp), p), p);
    REQUIRE(groups.size() == 1);
    for (const auto& c : groups[0].constraints) {
        REQUIRE(c.has_value());
        CHECK(std::abs(c->normal.norm() - 1.0) < 1e-12);
        CHECK(std::abs(c->normal.x()) < 1e-9);  // tangent of a vertical curve
    }
    // normals point into the curve
    CHECK(groups[0].constraints[0]->signed_distance(Eigen::Vector2d(19, 15)) > 0);
    CHECK(groups[0].constraints[1]->signed_distance(Eigen::Vector2d(19, 15)) > 0);
}

TEST_CASE("constraints: a closed curve around a disc has none") {
    DisparityImage::Array a = DisparityImage::Array::Constant(48, 48, 0.2f);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x)
            if ((x - 24) * (x - 24) + (y - 24) * (y - 24) <= 12 * 12) a(y, x) = 0.8f;
    const Ldi ldi = lift(a);
    const HallucinateParams p;
    const auto groups = derive_constraints(ldi, group_into_curves(ldi, detect_discontinuities(ldi, p.tau_disp), p), p);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].closed);
    CHECK(!groups[0].constraints[0].has_value());
    CHECK(!groups[0].constraints[1].has_value());
}

TEST_CASE("expand: no groups leaves the LDI unchanged") {
    const Ldi ldi = lift(vertical_step(32, 24, 16, 0.2f, 0.8f));
    const Ldi out = expand(ldi, {}, HallucinateParams{});
    CHECK(out.size() == ldi.size());
    CHECK(out.values() == ldi.values());
    CHECK(out.index() == ldi.index());
}

TEST_CASE("expand: a straight edge segment grows a band clipped by its end perpendiculars") {
    const int w = 80, h = 64, at = 30;
    const Ldi ldi = lift(vertical_step(w, h, at, 0.2f, 0.8f));
    HallucinateParams p;
    auto groups = group_into_curves(ldi, detect_discontinuities(ldi, p.tau_disp), p);
    REQUIRE(groups.size() == 1);
    // keep rows 10..49 only, as if the edge faded out above and below
    auto inside = [&](const DiscontinuityPixel& e) { return ldi.y(e.back) >= 10 && ldi.y(e.back) < 50; };
    CurveGroup& g = groups[0];
    std::erase_if(g.chain, [&](const DiscontinuityPixel& e) { return !inside(e); });
    std::erase_if(g.edges, [&](const DiscontinuityPixel& e) { return !inside(e); });
    groups = derive_constraints(ldi, groups, p);

    for (int n : {1, 7, 20}) {
        p.iterations = n;
        ExpansionTrace trace;
        const Ldi out = expand(ldi, groups, p, &trace);
        std::set<std::pair<int, int>> got, want;
        for (int k = ldi.size(); k < out.size(); ++k) {
            got.insert({out.x(k), out.y(k)});
            CHECK(out.disparity(k) == 0.2f);
            CHECK(!out.known(k));
        }
        for (int y = 10; y < 50; ++y)
            for (int x = at; x < at + n; ++x) want.insert({x, y});
        CHECK(got == want);
        CHECK(std::size_t(out.size() - ldi.size()) == want.size());
        for (int c : trace.created_per_iteration) CHECK(c == 40);
        CHECK(validate(out).empty());
    }
}

TEST_CASE("expand: new pixels copy a constant background disparity and link to it") {
    const Ldi ldi = lift(vertical_step(40, 30, 20, 0.3f, 0.9f));
    HallucinateParams p;
    p.iterations = 10;
    ExpansionTrace trace;
    std::vector<CurveGroup> groups;
    const Ldi out = hallucinate(ldi, p, &trace, &groups);
    REQUIRE(out.size() > ldi.size());
    for (int k = ldi.size(); k < out.size(); ++k) {
        CHECK(out.disparity(k) == 0.3f);
        CHECK(out.has_neighbor(k, Dir::Left));
    }
    const Audit a = audit(out, trace, groups);
    CHECK(a.not_hidden == 0);
    CHECK(a.constraint_violations == 0);
    CHECK(validate(out).empty());
}

TEST_CASE("expand: stacked occluders produce three layers") {
    const Scene s = desk_scene(0);
    HallucinateParams p;
    ExpansionTrace trace;
    std::vector<CurveGroup> groups;
    const Ldi out = hallucinate(lift_to_ldi(s.image, s.disparity, p.tau_disp), p, &trace, &groups);
    CHECK(PositionIndex(out).max_layers() >= 3);
    const Audit a = audit(out, trace, groups);
    CHECK(a.created > 0);
    CHECK(a.not_hidden == 0);
    CHECK(a.constraint_violations == 0);
    CHECK(validate(out).empty());
}

TEST_CASE("expand: growth is monotone and invariants hold on desk scenes") {
    HallucinateParams p;
    for (int i = 1; i < 5; ++i) {
        const Scene s = desk_scene(i);
        const Ldi ldi = lift_to_ldi(s.image, s.disparity, p.tau_disp);
        ExpansionTrace trace;
        std::vector<CurveGroup> groups;
        const Ldi out = hallucinate(ldi, p, &trace, &groups);
        CHECK(trace.created_per_iteration.size() == 50u);
        int total = 0;
        for (int c : trace.created_per_iteration) {
            CHECK(c >= 0);
            total += c;
        }
        CHECK(out.size() == ldi.size() + total);
        const Audit a = audit(out, trace, groups);
        CHECK(a.created == total);
        CHECK(a.not_hidden == 0);
        CHECK(a.constraint_violations == 0);
        CHECK(validate(out).empty());
        // original pixels keep their data
        CHECK(out.values().leftCols(ldi.size()) == ldi.values());
    }
}

TEST_CASE("hallucinated chain pixels sit on the back side of their cut edge") {
    const Scene s = desk_scene(2);
    const HallucinateParams p;
    const Ldi ldi = lift_to_ldi(s.image, s.disparity, p.tau_disp);
    for (const CurveGroup& g : group_into_curves(ldi, detect_discontinuities(ldi, p.tau_disp), p)) {
        CHECK(int(g.chain.size()) >= p.min_group_length);
        CHECK(chain_cells(ldi, g).size() == g.chain.size());
        for (const DiscontinuityPixel& e : g.edges) {
            CHECK(std::abs(ldi.x(e.back) - ldi.x(e.front)) + std::abs(ldi.y(e.back) - ldi.y(e.front)) == 1);
            CHECK(ldi.disparity(e.front) - ldi.disparity(e.back) > p.tau_disp);
        }
    }
}
