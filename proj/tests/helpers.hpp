#pragma once

// Shared fixtures and independent reference implementations used by the unit
// and acceptance suites. The reference solvers here are written against the
// underlying math, not against the library internals, so they can serve as
// cross-checking oracles:
//   * qp_reference     - projected-gradient solver for the dual SVM program
//   * brute_pick       - sort-based closest-to-boundary candidate selection
//   * patch_reference  - direct 2D fractional-overlap patch resampling
//   * kde_grid_argmax  - dense-grid density maximization

#include <sys/types.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "actlearn/active.hpp"
#include "actlearn/config.hpp"
#include "actlearn/features.hpp"
#include "actlearn/kde.hpp"
#include "actlearn/rng.hpp"
#include "actlearn/svm.hpp"

namespace testutil {

using namespace actlearn;

// ---------------------------------------------------------------------------
// Small constructors

inline FeatureVector fv(std::initializer_list<double> head) {
    FeatureVector f;
    int i = 0;
    for (double v : head) {
        if (i >= kFeatureDim) break;
        f.values[i++] = v;
    }
    return f;
}

inline FeatureVector fv1(double x) { return fv({x}); }

// Two Gaussian blobs with the requested class counts, shuffled; the blob
// centers are far enough apart to be mostly (not always) separable.
inline LabeledDataset random_dataset(RngStream& rng, int n_pos, int n_neg, int dims = 3,
                                     double separation = 3.0) {
    LabeledDataset d;
    std::vector<int> labels;
    for (int i = 0; i < n_pos; i++) labels.push_back(+1);
    for (int i = 0; i < n_neg; i++) labels.push_back(-1);
    for (size_t i = labels.size(); i > 1; i--)
        std::swap(labels[i - 1], labels[rng.next_below(i)]);
    for (int lab : labels) {
        Example e;
        e.label = lab;
        for (int k = 0; k < dims; k++)
            e.x.values[k] = 0.5 * separation * lab + rng.next_gaussian();
        e.x.point = Vec3(rng.next_double(), rng.next_double(), rng.next_double());
        d.examples.push_back(e);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Reference QP solver for the dual of the class-weighted soft-margin SVM:
//     max  sum(a) - 1/2 a' Q a   s.t.  0 <= a_i <= C_i,  sum_i y_i a_i = 0
// Projected gradient ascent with Nesterov momentum (restarted whenever the
// objective would decrease) and a fixed 1/lambda_max step.

struct QpSolution {
    std::vector<double> alpha;
    double objective = 0.0;  // sum(a) - 1/2 a' Q a
    double bias = 0.0;
};

// Euclidean projection onto { 0 <= a_i <= C_i, sum_i y_i a_i = 0 }: bisection
// on the multiplier nu of the equality constraint; the constraint residual
// g(nu) = sum_i y_i clamp(z_i - nu y_i, 0, C_i) is non-increasing in nu.
inline std::vector<double> project_box_hyperplane(const std::vector<double>& z,
                                                  const std::vector<double>& y,
                                                  const std::vector<double>& C) {
    const size_t n = z.size();
    std::vector<double> a(n);
    auto residual = [&](double nu) {
        double g = 0.0;
        for (size_t i = 0; i < n; i++) {
            a[i] = std::clamp(z[i] - nu * y[i], 0.0, C[i]);
            g += y[i] * a[i];
        }
        return g;
    };
    double span = 1.0;
    for (size_t i = 0; i < n; i++) span = std::max(span, std::abs(z[i]) + C[i]);
    double lo = -2.0 * span, hi = 2.0 * span;
    for (int it = 0; it < 200; it++) {
        double mid = 0.5 * (lo + hi);
        if (residual(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    residual(0.5 * (lo + hi));
    return a;
}

inline QpSolution qp_reference(const LabeledDataset& data, double gamma, double cost_neg,
                               double cost_pos_in, int max_iter = 400000, double kkt_eps = 1e-10) {
    const int n = static_cast<int>(data.examples.size());
    int n_pos = data.positives(), n_neg = data.negatives();
    double cost_pos = cost_pos_in > 0.0
                          ? cost_pos_in
                          : cost_neg * static_cast<double>(n_neg) / static_cast<double>(n_pos);

    std::vector<double> y(n), C(n);
    for (int i = 0; i < n; i++) {
        y[i] = data.examples[i].label;
        C[i] = y[i] > 0 ? cost_pos : cost_neg;
    }
    Eigen::MatrixXd Q(n, n);
    for (int i = 0; i < n; i++) {
        for (int j = 0; j < n; j++) {
            double k = std::exp(-gamma *
                                (data.examples[i].x.values - data.examples[j].x.values).squaredNorm());
            Q(i, j) = y[i] * y[j] * k;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    double lmax = es.eigenvalues().maxCoeff();
    double step = 1.0 / std::max(lmax, 1e-12);

    auto objective = [&](const std::vector<double>& a) {
        Eigen::Map<const Eigen::VectorXd> av(a.data(), n);
        return av.sum() - 0.5 * av.dot(Q * av);
    };
    auto kkt_gap = [&](const std::vector<double>& a) {
        Eigen::Map<const Eigen::VectorXd> av(a.data(), n);
        Eigen::VectorXd G = Q * av - Eigen::VectorXd::Ones(n);
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
        for (int t = 0; t < n; t++) {
            double v = -y[t] * G[t];
            bool up = (y[t] > 0 && a[t] < C[t]) || (y[t] < 0 && a[t] > 0);
            bool low = (y[t] > 0 && a[t] > 0) || (y[t] < 0 && a[t] < C[t]);
            if (up) m = std::max(m, v);
            if (low) M = std::min(M, v);
        }
        return m - M;
    };

    std::vector<double> alpha(n, 0.0), mom = alpha, next(n);
    double t_mom = 1.0;
    double obj = objective(alpha);
    for (int it = 0; it < max_iter; it++) {
        Eigen::Map<const Eigen::VectorXd> mv(mom.data(), n);
        Eigen::VectorXd grad = Eigen::VectorXd::Ones(n) - Q * mv;
        std::vector<double> z(n);
        for (int i = 0; i < n; i++) z[i] = mom[i] + step * grad[i];
        next = project_box_hyperplane(z, y, C);
        double next_obj = objective(next);
        if (next_obj < obj) {
            // Momentum overshot: restart from the plain gradient step.
            Eigen::Map<const Eigen::VectorXd> av(alpha.data(), n);
            Eigen::VectorXd g2 = Eigen::VectorXd::Ones(n) - Q * av;
            for (int i = 0; i < n; i++) z[i] = alpha[i] + step * g2[i];
            next = project_box_hyperplane(z, y, C);
            next_obj = objective(next);
            t_mom = 1.0;
        }
        double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
        for (int i = 0; i < n; i++)
            mom[i] = next[i] + ((t_mom - 1.0) / t_next) * (next[i] - alpha[i]);
        double moved = 0.0;
        for (int i = 0; i < n; i++) moved = std::max(moved, std::abs(next[i] - alpha[i]));
        alpha = next;
        obj = next_obj;
        t_mom = t_next;
        if ((it & 63) == 0 && kkt_gap(alpha) <= kkt_eps) break;
        if (moved < 1e-16 && kkt_gap(alpha) <= 1e-8) break;
    }

    QpSolution sol;
    sol.alpha = alpha;
    sol.objective = obj;
    // Standard midpoint bias from the final gradient bounds.
    Eigen::Map<const Eigen::VectorXd> av(alpha.data(), n);
    Eigen::VectorXd G = Q * av - Eigen::VectorXd::Ones(n);
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; t++) {
        double v = -y[t] * G[t];
        bool up = (y[t] > 0 && alpha[t] < C[t]) || (y[t] < 0 && alpha[t] > 0);
        bool low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C[t]);
        if (up) m = std::max(m, v);
        if (low) M = std::min(M, v);
    }
    if (std::isfinite(m) && std::isfinite(M)) sol.bias = 0.5 * (m + M);
    else if (std::isfinite(m)) sol.bias = m;
    else if (std::isfinite(M)) sol.bias = M;
    return sol;
}

inline double qp_decision(const QpSolution& sol, const LabeledDataset& data, double gamma,
                          const FeatureVector& x) {
    double f = sol.bias;
    for (size_t i = 0; i < data.examples.size(); i++)
        f += sol.alpha[i] * data.examples[i].label *
             std::exp(-gamma * (data.examples[i].x.values - x.values).squaredNorm());
    return f;
}

// ---------------------------------------------------------------------------
// Reference candidate selection: filter-and-sort instead of a streaming scan.

struct BrutePickResult {
    bool converged = true;
    size_t index = 0;
    double distance = 0.0;
};

inline BrutePickResult brute_pick(const SvmModel& model, const CandidatePool& pool) {
    double guard = std::numeric_limits<double>::infinity();
    for (const auto& sv : model.support_vectors)
        guard = std::min(guard, std::abs(decision_value(model, sv)));
    std::vector<std::pair<double, size_t>> qualifying;
    for (size_t i = 0; i < pool.instances.size(); i++) {
        if (pool.consumed[i]) continue;
        double d = std::abs(decision_value(model, pool.instances[i]));
        if (d < guard) qualifying.emplace_back(d, i);
    }
    BrutePickResult res;
    if (qualifying.empty()) return res;
    auto best = *std::min_element(qualifying.begin(), qualifying.end());
    res.converged = false;
    res.distance = best.first;
    res.index = best.second;
    return res;
}

// ---------------------------------------------------------------------------
// Reference patch extraction: direct 2D fractional-overlap box averaging (no
// separable passes, no precomputed taps).

inline Eigen::VectorXd patch_reference(const Image& img, int u, int v,
                                       const PatchSpec& spec = PatchSpec()) {
    const int t = spec.target;
    Eigen::VectorXd out(spec.raw_length());
    int scale_idx = 0;
    for (int w : spec.widths) {
        const double scale = static_cast<double>(w) / t;
        const int half = w / 2;
        const int base = scale_idx * t * t * spec.channels;
        for (int ch = 0; ch < spec.channels; ch++) {
            for (int row = 0; row < t; row++) {
                double r0 = row * scale, r1 = (row + 1) * scale;
                for (int col = 0; col < t; col++) {
                    double c0 = col * scale, c1 = (col + 1) * scale;
                    double acc = 0.0;
                    for (int r = static_cast<int>(std::floor(r0));
                         r < static_cast<int>(std::ceil(r1)); r++) {
                        double ov_r = std::min(static_cast<double>(r + 1), r1) -
                                      std::max(static_cast<double>(r), r0);
                        if (ov_r <= 0.0) continue;
                        for (int c = static_cast<int>(std::floor(c0));
                             c < static_cast<int>(std::ceil(c1)); c++) {
                            double ov_c = std::min(static_cast<double>(c + 1), c1) -
                                          std::max(static_cast<double>(c), c0);
                            if (ov_c <= 0.0) continue;
                            acc += ov_r * ov_c *
                                   (img.at_clamped(u - half + c, v - half + r, ch) / 255.0);
                        }
                    }
                    out[base + (row * t + col) * spec.channels + ch] = acc / (scale * scale);
                }
            }
        }
        scale_idx++;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reference KDE mode: dense-grid argmax over the candidate bounding box (the
// density maximum of a Gaussian mixture lies in the convex hull of its
// components, so the box padded by one cell always contains it).

inline Vec3 kde_grid_argmax(const Kde& kde, const std::vector<Vec3>& points,
                            double cell = 0.001) {
    Vec3 lo = points[0], hi = points[0];
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    lo -= Vec3::Constant(cell);
    hi += Vec3::Constant(cell);
    Vec3 best = lo;
    double best_density = -1.0;
    for (double x = lo.x(); x <= hi.x() + 1e-12; x += cell)
        for (double y = lo.y(); y <= hi.y() + 1e-12; y += cell)
            for (double z = lo.z(); z <= hi.z() + 1e-12; z += cell) {
                Vec3 g(x, y, z);
                double d = kde.density(g);
                if (d > best_density) {
                    best_density = d;
                    best = g;
                }
            }
    return best;
}

// ---------------------------------------------------------------------------
// Scratch directories and fast scenario configs

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("actlearn_" + tag + "_" + std::to_string(getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string str() const { return path.string(); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// A 354x354 scene: same geometry as the standard scenarios, ~4x fewer pixels.
inline ScenarioConfig small_scene(DeviceKind kind) {
    ScenarioConfig cfg;
    cfg.kind = kind;
    cfg.texture_seed = 7;
    cfg.image_width = 354;
    cfg.image_height = 354;
    cfg.focal_px = 380.0;
    cfg.principal_x = 176.5;
    cfg.principal_y = 176.5;
    cfg.cloud_stride = 4;
    cfg.candidate_count = 150;
    cfg.verifier = VerifierKind::kOracle;
    if (kind == DeviceKind::kDrawer) {
        cfg.device_pos = Vec3(0.0, 0.0, 0.75);
        cfg.seed_point = Vec3(0.0, 0.0, 0.75);
        cfg.camera_height = 0.75;
    }
    return cfg;
}

template <typename A, typename B>
bool bits_equal(const A& a, const B& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

inline bool images_equal(const Image& a, const Image& b) {
    return a.width == b.width && a.height == b.height && a.pixels == b.pixels;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace testutil
