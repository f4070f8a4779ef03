#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "actlearn/geometry.hpp"
#include "actlearn/image.hpp"
#include "actlearn/io.hpp"
#include "actlearn/rng.hpp"
#include "actlearn/scene.hpp"

namespace actlearn {

constexpr int kFeatureDim = 50;

struct SamplerParams {
    Vec3 mean = Vec3::Zero();
    Vec3 variance = Vec3::Constant(0.0025);  // diagonal covariance, m^2
    int count = 200;
};

struct PatchSpec {
    std::array<int, 4> widths{41, 81, 161, 321};
    int target = 31;
    int channels = 3;

    int raw_length() const {
        return static_cast<int>(widths.size()) * target * target * channels;
    }
    int max_width() const { return widths.back(); }
};

// Layout descriptor frozen into PcaBasis files; load refuses a mismatch.
inline std::string patch_layout_descriptor(const PatchSpec& spec) {
    std::string s = "scales=";
    for (size_t i = 0; i < spec.widths.size(); i++) {
        if (i) s += ",";
        s += std::to_string(spec.widths[i]);
    }
    s += ";target=" + std::to_string(spec.target);
    s += ";order=small-to-large;channels=rgb-interleaved;range=unit";
    return s;
}

struct PcaBasis {
    Eigen::VectorXd mean;          // raw-vector dimension d
    Eigen::MatrixXd basis;         // d x r, column-orthonormal, descending eigenvalue
    Eigen::VectorXd eigenvalues;   // r entries, sample-covariance (n-1) convention
    std::string behavior;

    int rank() const { return static_cast<int>(basis.cols()); }
};

struct FeatureVector {
    Eigen::Matrix<double, kFeatureDim, 1> values = Eigen::Matrix<double, kFeatureDim, 1>::Zero();
    Vec3 point = Vec3::Zero();
    int u = 0;
    int v = 0;
};

namespace detail {

struct ResampleTap {
    int src;
    double weight;
};

// Overlap weights for area-averaging src_len source cells into dst_len target
// cells. Each target cell covers src_len/dst_len source cells; fractional
// boundary cells contribute proportionally.
inline std::vector<std::vector<ResampleTap>> resample_taps(int src_len, int dst_len) {
    std::vector<std::vector<ResampleTap>> taps(dst_len);
    double scale = static_cast<double>(src_len) / dst_len;
    for (int j = 0; j < dst_len; j++) {
        double start = j * scale;
        double end = (j + 1) * scale;
        int s0 = static_cast<int>(std::floor(start));
        int s1 = static_cast<int>(std::ceil(end));
        if (s1 > src_len) s1 = src_len;
        for (int s = s0; s < s1; s++) {
            double lo = std::max(start, static_cast<double>(s));
            double hi = std::min(end, static_cast<double>(s + 1));
            if (hi > lo) taps[j].push_back({s, (hi - lo) / scale});
        }
    }
    return taps;
}

inline const std::vector<std::vector<ResampleTap>>& taps_for(int src_len, int dst_len) {
    static const std::array<int, 4> kWidths{41, 81, 161, 321};
    static const std::array<std::vector<std::vector<ResampleTap>>, 4> kTables = [] {
        std::array<std::vector<std::vector<ResampleTap>>, 4> t;
        for (size_t i = 0; i < kWidths.size(); i++) t[i] = resample_taps(kWidths[i], 31);
        return t;
    }();
    for (size_t i = 0; i < kWidths.size(); i++)
        if (kWidths[i] == src_len && dst_len == 31) return kTables[i];
    // Non-standard sizes (tests) fall back to a per-call table.
    thread_local std::vector<std::vector<ResampleTap>> scratch;
    scratch = resample_taps(src_len, dst_len);
    return scratch;
}

}  // namespace detail

// Multi-scale patch vector at pixel (u, v): per width, crop a centered square
// (clamp-to-edge), area-average to target x target, concatenate channel-
// interleaved in fixed small-to-large scale order. Intensities in [0, 1].
inline Eigen::VectorXd extract_patch_vector(const Image& img, int u, int v,
                                            const PatchSpec& spec = PatchSpec()) {
    if (!img.in_bounds(u, v)) throw std::invalid_argument("extract_patch_vector: pixel outside image");
    const int t = spec.target;
    Eigen::VectorXd out(spec.raw_length());
    std::vector<double> crop;
    std::vector<double> tmp;
    int scale_idx = 0;
    for (int w : spec.widths) {
        const auto& taps = detail::taps_for(w, t);
        int half = w / 2;
        for (int ch = 0; ch < spec.channels; ch++) {
            crop.resize(static_cast<size_t>(w) * w);
            for (int r = 0; r < w; r++)
                for (int c = 0; c < w; c++)
                    crop[static_cast<size_t>(r) * w + c] =
                        img.at_clamped(u - half + c, v - half + r, ch) / 255.0;
            // Horizontal pass: w rows x t cols.
            tmp.resize(static_cast<size_t>(w) * t);
            for (int r = 0; r < w; r++)
                for (int j = 0; j < t; j++) {
                    double acc = 0.0;
                    for (const auto& tap : taps[j]) acc += tap.weight * crop[static_cast<size_t>(r) * w + tap.src];
                    tmp[static_cast<size_t>(r) * t + j] = acc;
                }
            // Vertical pass into the interleaved output block for this scale.
            int base = scale_idx * t * t * spec.channels;
            for (int j = 0; j < t; j++)
                for (int i = 0; i < t; i++) {
                    double acc = 0.0;
                    for (const auto& tap : taps[j]) acc += tap.weight * tmp[static_cast<size_t>(tap.src) * t + i];
                    out[base + (j * t + i) * spec.channels + ch] = acc;
                }
        }
        scale_idx++;
    }
    return out;
}

// One weighted draw from the cloud (with replacement); the without-replacement
// sampler below builds on the same weights.
inline Eigen::VectorXd candidate_weights(const std::vector<CloudPoint>& cloud,
                                         const SamplerParams& params) {
    Eigen::VectorXd w(cloud.size());
    for (size_t i = 0; i < cloud.size(); i++) {
        Vec3 d = cloud[i].p - params.mean;
        double e = 0.5 * (d.x() * d.x() / params.variance.x() +
                          d.y() * d.y() / params.variance.y() +
                          d.z() * d.z() / params.variance.z());
        w[static_cast<Eigen::Index>(i)] = std::exp(-e);
    }
    return w;
}

inline size_t sample_candidate_once(const std::vector<CloudPoint>& cloud,
                                    const SamplerParams& params, RngStream& rng) {
    Eigen::VectorXd weights = candidate_weights(cloud, params);
    double total = weights.sum();
    if (total <= 0.0) {
        // All weights underflowed: fall back to the nearest point, matching
        // the variance -> 0 limit.
        size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < cloud.size(); i++) {
            double d2 = (cloud[i].p - params.mean).squaredNorm();
            if (d2 < bd) {
                bd = d2;
                best = i;
            }
        }
        return best;
    }
    double r = rng.next_double() * total;
    double acc = 0.0;
    for (size_t i = 0; i < cloud.size(); i++) {
        acc += weights[static_cast<Eigen::Index>(i)];
        if (r < acc) return i;
    }
    return cloud.size() - 1;
}

// Gaussian-weighted sampling without replacement. Returns cloud indices; if
// the cloud has fewer points than requested, all indices are returned.
inline std::vector<size_t> sample_candidate_indices(const std::vector<CloudPoint>& cloud,
                                                    const SamplerParams& params, RngStream& rng) {
    if (cloud.empty()) throw std::invalid_argument("sample_candidates: empty cloud");
    if (params.count < 1 || params.variance.minCoeff() <= 0.0)
        throw std::invalid_argument("sample_candidates: invalid params");
    size_t want = std::min(static_cast<size_t>(params.count), cloud.size());
    Eigen::VectorXd w = candidate_weights(cloud, params);
    std::vector<size_t> picked;
    picked.reserve(want);
    std::vector<char> used(cloud.size(), 0);
    for (size_t k = 0; k < want; k++) {
        double total = w.sum();
        size_t idx;
        if (total > 0.0) {
            double r = rng.next_double() * total;
            double acc = 0.0;
            idx = cloud.size() - 1;
            for (size_t i = 0; i < cloud.size(); i++) {
                if (used[i]) continue;
                acc += w[static_cast<Eigen::Index>(i)];
                if (r < acc) {
                    idx = i;
                    break;
                }
            }
            if (used[idx]) {  // numeric tail: take the last unused index
                idx = cloud.size();
                for (size_t i = cloud.size(); i-- > 0;)
                    if (!used[i]) {
                        idx = i;
                        break;
                    }
            }
        } else {
            // All remaining weights underflowed: deterministic nearest-first.
            idx = cloud.size();
            double best = std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < cloud.size(); i++) {
                if (used[i]) continue;
                double d2 = (cloud[i].p - params.mean).squaredNorm();
                if (d2 < best) {
                    best = d2;
                    idx = i;
                }
            }
        }
        if (idx >= cloud.size())
            throw std::logic_error("sample_candidates: no unused point left");
        used[idx] = 1;
        w[static_cast<Eigen::Index>(idx)] = 0.0;
        picked.push_back(idx);
    }
    return picked;
}

inline std::vector<Vec3> sample_candidates(const std::vector<CloudPoint>& cloud,
                                           const SamplerParams& params, RngStream& rng) {
    std::vector<Vec3> pts;
    for (size_t i : sample_candidate_indices(cloud, params, rng)) pts.push_back(cloud[i].p);
    return pts;
}

// PCA of the sample covariance (n-1 convention), top-k eigenvectors by
// descending eigenvalue. Uses the Gram matrix when dimension exceeds count, so
// the 11,532-d case never forms a d x d covariance.
inline PcaBasis fit_pca(const std::vector<Eigen::VectorXd>& raws, int k = kFeatureDim,
                        const std::string& behavior = "") {
    if (raws.size() < 2) throw std::invalid_argument("fit_pca: need at least 2 vectors");
    const Eigen::Index d = raws[0].size();
    const Eigen::Index n = static_cast<Eigen::Index>(raws.size());
    for (const auto& r : raws)
        if (r.size() != d) throw std::invalid_argument("fit_pca: inconsistent dimensions");

    PcaBasis out;
    out.behavior = behavior;
    out.mean = Eigen::VectorXd::Zero(d);
    for (const auto& r : raws) out.mean += r;
    out.mean /= static_cast<double>(n);

    Eigen::MatrixXd X(d, n);
    for (Eigen::Index i = 0; i < n; i++) X.col(i) = raws[static_cast<size_t>(i)] - out.mean;

    Eigen::VectorXd evals;
    Eigen::MatrixXd evecs;
    if (d <= n) {
        Eigen::MatrixXd cov = (X * X.transpose()) / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        evals = es.eigenvalues();
        evecs = es.eigenvectors();
    } else {
        Eigen::MatrixXd gram = X.transpose() * X;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        evals = es.eigenvalues() / static_cast<double>(n - 1);
        evecs.resize(d, n);
        for (Eigen::Index i = 0; i < n; i++) {
            double g = es.eigenvalues()[i];
            if (g > 0.0)
                evecs.col(i) = (X * es.eigenvectors().col(i)) / std::sqrt(g);
            else
                evecs.col(i).setZero();
        }
    }
    // SelfAdjointEigenSolver sorts ascending; flip to descending.
    double max_ev = evals.size() ? evals[evals.size() - 1] : 0.0;
    if (max_ev <= 1e-14)
        throw std::runtime_error("fit_pca: zero variance (all input vectors identical)");
    double cutoff = max_ev * 1e-9;
    int rank = 0;
    for (Eigen::Index i = evals.size(); i-- > 0 && rank < k;)
        if (evals[i] > cutoff) rank++;

    out.basis.resize(d, rank);
    out.eigenvalues.resize(rank);
    for (int j = 0; j < rank; j++) {
        Eigen::Index src = evals.size() - 1 - j;
        Eigen::VectorXd v = evecs.col(src);
        v.normalize();
        // Deterministic sign: the largest-magnitude component is positive.
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0.0) v = -v;
        out.basis.col(j) = v;
        out.eigenvalues[j] = evals[src];
    }
    return out;
}

inline FeatureVector project(const PcaBasis& basis, const Eigen::VectorXd& raw) {
    if (raw.size() != basis.mean.size())
        throw std::invalid_argument("project: raw vector dimension mismatch");
    if (basis.rank() > kFeatureDim)
        throw std::invalid_argument("project: basis rank exceeds feature dimension");
    FeatureVector f;
    f.values.head(basis.rank()) = basis.basis.transpose() * (raw - basis.mean);
    return f;
}

inline constexpr char kPcaMagic[8] = {'A', 'L', 'P', 'C', 'A', 'B', '0', '1'};

inline void save_pca_basis(std::ostream& out, const PcaBasis& b,
                           const PatchSpec& spec = PatchSpec()) {
    write_magic(out, kPcaMagic);
    write_pod<uint32_t>(out, 1);
    write_string(out, b.behavior);
    write_string(out, patch_layout_descriptor(spec));
    write_pod<uint64_t>(out, static_cast<uint64_t>(b.mean.size()));
    write_pod<uint64_t>(out, static_cast<uint64_t>(b.basis.cols()));
    write_f64_array(out, b.mean.data(), static_cast<size_t>(b.mean.size()));
    // Row-major payload per the format contract; Eigen stores column-major.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = b.basis;
    write_f64_array(out, rm.data(), static_cast<size_t>(rm.size()));
    Eigen::VectorXd ev = b.eigenvalues;
    write_pod<uint64_t>(out, static_cast<uint64_t>(ev.size()));
    write_f64_array(out, ev.data(), static_cast<size_t>(ev.size()));
}

inline PcaBasis load_pca_basis(std::istream& in, const PatchSpec& spec = PatchSpec()) {
    expect_magic(in, kPcaMagic, "pca-basis");
    expect_version(in, 1, "pca-basis");
    PcaBasis b;
    b.behavior = read_string(in);
    std::string layout = read_string(in);
    if (layout != patch_layout_descriptor(spec))
        throw std::runtime_error("pca-basis: patch layout mismatch: " + layout);
    uint64_t d = read_pod<uint64_t>(in);
    uint64_t k = read_pod<uint64_t>(in);
    if (d == 0 || d > (1ull << 24) || k > d)
        throw std::runtime_error("pca-basis: unreasonable dimensions");
    b.mean.resize(static_cast<Eigen::Index>(d));
    read_f64_array(in, b.mean.data(), d);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(
        static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
    read_f64_array(in, rm.data(), d * k);
    b.basis = rm;
    uint64_t ne = read_pod<uint64_t>(in);
    if (ne != k) throw std::runtime_error("pca-basis: eigenvalue count mismatch");
    b.eigenvalues.resize(static_cast<Eigen::Index>(ne));
    read_f64_array(in, b.eigenvalues.data(), ne);
    return b;
}

}  // namespace actlearn
