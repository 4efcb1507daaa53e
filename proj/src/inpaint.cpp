#include "ldiphoto/inpaint.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <deque>

#include "ldiphoto/error.hpp"

namespace ldiphoto {

std::vector<std::uint8_t> front_edge_pixels(const Ldi& ldi, float tau_disp) {
    const PositionIndex positions(ldi);
    std::vector<std::uint8_t> edge(std::size_t(ldi.size()), 0);
    for (int k = 0; k < ldi.size(); ++k) {
        for (Dir d : kAllDirs) {
            if (ldi.has_neighbor(k, d)) continue;
            const int qx = ldi.x(k) + dx(d);
            const int qy = ldi.y(k) + dy(d);
            if (qx < 0 || qy < 0 || qx >= ldi.width() || qy >= ldi.height()) continue;
            for (int q : positions.at(qx, qy))
                if (ldi.disparity(k) - ldi.disparity(q) > tau_disp) edge[std::size_t(k)] = 1;
        }
    }
    return edge;
}

std::vector<PixelClass> classify(const Ldi& ldi, int margin, float tau_disp) {
    std::vector<PixelClass> classes(std::size_t(ldi.size()), PixelClass::Known);
    const auto edge = front_edge_pixels(ldi, tau_disp);
    std::vector<int> dist(std::size_t(ldi.size()), -1);
    std::deque<int> queue;
    for (int k = 0; k < ldi.size(); ++k)
        if (edge[std::size_t(k)] && ldi.known(k)) {
            dist[std::size_t(k)] = 0;
            queue.push_back(k);
        }
    while (!queue.empty()) {
        const int k = queue.front();
        queue.pop_front();
        if (dist[std::size_t(k)] + 1 >= margin) continue;
        for (Dir d : kAllDirs) {
            const int n = ldi.neighbor(k, d);
            if (n < 0 || dist[std::size_t(n)] >= 0 || !ldi.known(n)) continue;
            dist[std::size_t(n)] = dist[std::size_t(k)] + 1;
            queue.push_back(n);
        }
    }
    for (int k = 0; k < ldi.size(); ++k) {
        if (!ldi.known(k))
            classes[std::size_t(k)] = PixelClass::OccludedUnknown;
        else if (dist[std::size_t(k)] >= 0 && dist[std::size_t(k)] < margin)
            classes[std::size_t(k)] = PixelClass::ForegroundNearEdge;
    }
    return classes;
}

std::vector<std::uint8_t> select_classes(const std::vector<PixelClass>& classes, std::initializer_list<PixelClass> wanted) {
    std::vector<std::uint8_t> out(classes.size(), 0);
    for (std::size_t i = 0; i < classes.size(); ++i)
        out[i] = std::find(wanted.begin(), wanted.end(), classes[i]) != wanted.end();
    return out;
}

void diffusion_inpaint(Ldi& ldi, const std::vector<std::uint8_t>& targets, const DiffusionParams& params,
                       DiffusionStats* stats) {
    if (int(targets.size()) != ldi.size()) throw InputError("target mask length does not match the LDI");
    const int channels = ldi.color_channels();
    std::vector<int> local(std::size_t(ldi.size()), -1);
    std::vector<int> ids;
    for (int k = 0; k < ldi.size(); ++k)
        if (targets[std::size_t(k)]) {
            local[std::size_t(k)] = int(ids.size());
            ids.push_back(k);
        }
    DiffusionStats st;
    if (ids.empty()) {
        if (stats) *stats = st;
        return;
    }

    // Start from the nearest boundary color (breadth-first over connections).
    std::vector<std::uint8_t> reached(std::size_t(ldi.size()), 0);
    std::deque<int> queue;
    Eigen::VectorXf mean = Eigen::VectorXf::Zero(channels);
    int boundary = 0;
    for (int k = 0; k < ldi.size(); ++k)
        if (!targets[std::size_t(k)]) {
            reached[std::size_t(k)] = 1;
            mean += ldi.color(k);
            ++boundary;
        }
    for (int k = 0; k < ldi.size(); ++k) {
        if (targets[std::size_t(k)]) continue;
        for (Dir d : kAllDirs) {
            const int n = ldi.neighbor(k, d);
            if (n >= 0 && !reached[std::size_t(n)]) {
                reached[std::size_t(n)] = 1;
                ldi.color(n) = ldi.color(k);
                queue.push_back(n);
            }
        }
    }
    while (!queue.empty()) {
        const int k = queue.front();
        queue.pop_front();
        for (Dir d : kAllDirs) {
            const int n = ldi.neighbor(k, d);
            if (n >= 0 && !reached[std::size_t(n)]) {
                reached[std::size_t(n)] = 1;
                ldi.color(n) = ldi.color(k);
                queue.push_back(n);
            }
        }
    }
    if (boundary > 0) mean /= float(boundary);
    else mean.setConstant(0.5f);

    // Reachable targets iterate; isolated ones take the mean color.
    std::vector<int> active;
    for (int k : ids) {
        if (reached[std::size_t(k)]) {
            active.push_back(k);
        } else {
            ldi.color(k) = mean;
            ++st.isolated_pixels;
        }
    }
    // Graph Laplacian restricted to the reachable targets; known neighbors move to the right side.
    const int n_active = int(active.size());
    std::fill(local.begin(), local.end(), -1);
    for (int i = 0; i < n_active; ++i) local[std::size_t(active[std::size_t(i)])] = i;
    if (n_active > 0) {
        std::vector<Eigen::Triplet<double>> entries;
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n_active, channels);
        Eigen::MatrixXd guess(n_active, channels);
        for (int i = 0; i < n_active; ++i) {
            const int k = active[std::size_t(i)];
            int degree = 0;
            for (Dir d : kAllDirs) {
                const int n = ldi.neighbor(k, d);
                if (n < 0) continue;
                ++degree;
                if (local[std::size_t(n)] >= 0) entries.emplace_back(i, local[std::size_t(n)], -1.0);
                else rhs.row(i) += ldi.color(n).cast<double>().transpose();
            }
            entries.emplace_back(i, i, double(degree));
            guess.row(i) = ldi.color(k).cast<double>().transpose();
        }
        Eigen::SparseMatrix<double> lap(n_active, n_active);
        lap.setFromTriplets(entries.begin(), entries.end());
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
        cg.setMaxIterations(params.max_iterations);
        cg.setTolerance(params.tolerance);
        cg.compute(lap);
        const Eigen::MatrixXd solved = cg.solveWithGuess(rhs, guess);
        if (!solved.allFinite()) throw NumericError("diffusion produced non-finite colors");
        for (int i = 0; i < n_active; ++i) ldi.color(active[std::size_t(i)]) = solved.row(i).transpose().cast<float>();
        st.iterations = int(cg.iterations());
        st.last_change = float(cg.error());
    }
    for (int k : ids) ldi.set_known(k, true);
    if (stats) *stats = st;
}

void neural_inpaint(Ldi& ldi, const nn::NetworkSpec& net, const nn::WeightStore& weights, int margin, float tau_disp) {
    const auto classes = classify(ldi, margin, tau_disp);
    std::vector<float> known(classes.size());
    for (std::size_t i = 0; i < classes.size(); ++i) known[i] = classes[i] == PixelClass::Known ? 1.0f : 0.0f;
    const nn::LdiTensor out = nn::run_unet(ldi, known, net, weights);
    if (out.channels() != ldi.color_channels()) throw InputError("network output channels do not match LDI colors");
    for (int k = 0; k < ldi.size(); ++k) {
        if (known[std::size_t(k)] == 0.0f) ldi.color(k) = out.values.col(k);
        ldi.set_known(k, true);
    }
}

}  // namespace ldiphoto
