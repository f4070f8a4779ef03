#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "actlearn/geometry.hpp"

namespace actlearn {

// Gaussian kernel density estimate over 3D points. Bandwidth matrix is the
// sample covariance scaled by Scott's factor n^(-1/(d+4)), d = 3, unless an
// isotropic override (meters) is given.
struct Kde {
    std::vector<Vec3> points;
    Eigen::Matrix3d h_inv = Eigen::Matrix3d::Identity();
    double norm = 1.0;

    double density(const Vec3& x) const {
        double acc = 0.0;
        for (const auto& p : points) {
            Vec3 d = x - p;
            acc += std::exp(-0.5 * d.dot(h_inv * d));
        }
        return norm * acc;
    }
};

inline Kde fit_kde(const std::vector<Vec3>& points, double bandwidth_override = 0.0) {
    if (points.empty()) throw std::invalid_argument("fit_kde: no points");
    const double n = static_cast<double>(points.size());
    Eigen::Matrix3d H;
    if (bandwidth_override > 0.0) {
        H = Eigen::Matrix3d::Identity() * (bandwidth_override * bandwidth_override);
    } else {
        Vec3 mean = Vec3::Zero();
        for (const auto& p : points) mean += p;
        mean /= n;
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (const auto& p : points) {
            Vec3 d = p - mean;
            cov += d * d.transpose();
        }
        cov /= std::max(1.0, n - 1.0);
        double factor = std::pow(n, -1.0 / 7.0);  // Scott's rule, d = 3
        H = cov * (factor * factor);
    }
    // Keep H positive definite even for degenerate point sets.
    double floor = std::max(1e-8, 1e-6 * H.trace());
    for (int i = 0; i < 3; i++) H(i, i) += floor;

    Kde kde;
    kde.points = points;
    Eigen::LLT<Eigen::Matrix3d> llt(H);
    if (llt.info() != Eigen::Success) throw std::runtime_error("fit_kde: bandwidth not PD");
    kde.h_inv = llt.solve(Eigen::Matrix3d::Identity());
    double det = H.determinant();
    kde.norm = 1.0 / (std::pow(2.0 * M_PI, 1.5) * std::sqrt(det) * n);
    return kde;
}

// Hill climb from every start on a 26-neighbor grid, halving the step from
// 5 mm down to ~0.3 mm; returns the best end point across starts.
inline Vec3 kde_mode(const Kde& kde, const std::vector<Vec3>& starts, double initial_step = 0.005,
                     double min_step = 2e-4) {
    if (starts.empty()) throw std::invalid_argument("kde_mode: no starts");
    Vec3 best_point = starts[0];
    double best_density = -1.0;
    for (const auto& s : starts) {
        Vec3 x = s;
        double fx = kde.density(x);
        double step = initial_step;
        int guard = 0;
        while (step >= min_step && guard < 10000) {
            Vec3 best_n = x;
            double best_fn = fx;
            for (int di = -1; di <= 1; di++)
                for (int dj = -1; dj <= 1; dj++)
                    for (int dk = -1; dk <= 1; dk++) {
                        if (!di && !dj && !dk) continue;
                        Vec3 cand = x + step * Vec3(di, dj, dk);
                        double f = kde.density(cand);
                        if (f > best_fn) {
                            best_fn = f;
                            best_n = cand;
                        }
                    }
            if (best_fn > fx) {
                x = best_n;
                fx = best_fn;
            } else {
                step *= 0.5;
            }
            guard++;
        }
        if (fx > best_density) {
            best_density = fx;
            best_point = x;
        }
    }
    return best_point;
}

}  // namespace actlearn
