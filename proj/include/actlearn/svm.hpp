#pragma once

#include <Eigen/Core>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "actlearn/features.hpp"
#include "actlearn/io.hpp"

namespace actlearn {

struct SvmParams {
    double gamma = 0.0;     // 0 = derive 1 / (dim * mean feature variance) from data
    double cost_neg = 1.0;  // C-
    double cost_pos = 0.0;  // C+; 0 = cost_neg * #neg / #pos
    double tol = 1e-3;      // KKT violation tolerance (m - M stopping rule)
    int max_iter = 500000;
};

struct Example {
    FeatureVector x;
    int label = -1;  // +1 or -1
};

struct LabeledDataset {
    std::vector<Example> examples;
    std::string behavior;

    int count_label(int label) const {
        int n = 0;
        for (const auto& e : examples) n += e.label == label ? 1 : 0;
        return n;
    }
    int positives() const { return count_label(+1); }
    int negatives() const { return count_label(-1); }
    size_t size() const { return examples.size(); }
};

struct SvmModel {
    std::vector<FeatureVector> support_vectors;
    std::vector<double> coefficients;  // alpha_i * y_i
    double bias = 0.0;
    SvmParams params;                  // with resolved gamma and cost_pos
    double dual_objective = 0.0;       // sum(alpha) - 1/2 alpha' Q alpha at the solution
    bool trained = false;
};

inline double rbf_kernel(double gamma, const FeatureVector& a, const FeatureVector& b) {
    return std::exp(-gamma * (a.values - b.values).squaredNorm());
}

inline double effective_cost_pos(const SvmParams& params, int n_pos, int n_neg) {
    if (params.cost_pos > 0.0) return params.cost_pos;
    if (n_pos == 0) return params.cost_neg;
    return params.cost_neg * static_cast<double>(n_neg) / static_cast<double>(n_pos);
}

// Scale-aware default kernel width: 1 / (dim * mean per-dimension variance).
inline double auto_gamma(const std::vector<Example>& examples) {
    const int dim = kFeatureDim;
    Eigen::Matrix<double, kFeatureDim, 1> mean = Eigen::Matrix<double, kFeatureDim, 1>::Zero();
    for (const auto& e : examples) mean += e.x.values;
    mean /= static_cast<double>(examples.size());
    double var = 0.0;
    for (const auto& e : examples) var += (e.x.values - mean).squaredNorm();
    var /= static_cast<double>(examples.size()) * dim;
    if (var <= 1e-12) return 1.0;
    return 1.0 / (dim * var);
}

inline double auto_gamma(const std::vector<FeatureVector>& instances) {
    std::vector<Example> tmp;
    tmp.reserve(instances.size());
    for (const auto& f : instances) tmp.push_back({f, -1});
    return auto_gamma(tmp);
}

// SMO dual solver with maximal-violating-pair working sets and per-class box
// constraints. Deterministic: scan order breaks ties at the lowest index.
inline SvmModel train(const LabeledDataset& data, const SvmParams& params_in) {
    const int n = static_cast<int>(data.examples.size());
    int n_pos = data.positives(), n_neg = data.negatives();
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("svm train: both classes must be present");
    for (const auto& e : data.examples) {
        if (!e.x.values.allFinite()) throw std::invalid_argument("svm train: non-finite feature");
        if (e.label != 1 && e.label != -1)
            throw std::invalid_argument("svm train: labels must be +1 or -1");
    }
    SvmParams params = params_in;
    if (params.gamma <= 0.0) params.gamma = auto_gamma(data.examples);
    params.cost_pos = effective_cost_pos(params_in, n_pos, n_neg);
    if (params.cost_neg <= 0.0 || params.tol <= 0.0 || params.max_iter < 1)
        throw std::invalid_argument("svm train: invalid params");

    Eigen::MatrixXd K(n, n);
    std::vector<double> y(n), C(n);
    for (int i = 0; i < n; i++) {
        y[i] = data.examples[i].label;
        C[i] = y[i] > 0 ? params.cost_pos : params.cost_neg;
        K(i, i) = 1.0;
        for (int j = 0; j < i; j++) {
            double k = rbf_kernel(params.gamma, data.examples[i].x, data.examples[j].x);
            K(i, j) = k;
            K(j, i) = k;
        }
    }

    std::vector<double> alpha(n, 0.0), G(n, -1.0);
    for (int iter = 0; iter < params.max_iter; iter++) {
        int i = -1, j = -1;
        double m = -std::numeric_limits<double>::infinity();
        double M = std::numeric_limits<double>::infinity();
        for (int t = 0; t < n; t++) {
            double v = -y[t] * G[t];
            bool up = (y[t] > 0 && alpha[t] < C[t]) || (y[t] < 0 && alpha[t] > 0);
            bool low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C[t]);
            if (up && v > m) {
                m = v;
                i = t;
            }
            if (low && v < M) {
                M = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || m - M <= params.tol) break;

        double eta = K(i, i) + K(j, j) - 2.0 * K(i, j);
        if (eta < 1e-12) eta = 1e-12;
        double d = (m - M) / eta;
        double bound_i = y[i] > 0 ? C[i] - alpha[i] : alpha[i];
        double bound_j = y[j] > 0 ? alpha[j] : C[j] - alpha[j];
        d = std::min(d, std::min(bound_i, bound_j));
        alpha[i] += y[i] * d;
        alpha[j] -= y[j] * d;
        for (int t = 0; t < n; t++) G[t] += d * y[t] * (K(t, i) - K(t, j));
    }

    // Bias from the final violating-pair bounds (midpoint rule).
    double m = -std::numeric_limits<double>::infinity();
    double M = std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; t++) {
        double v = -y[t] * G[t];
        bool up = (y[t] > 0 && alpha[t] < C[t]) || (y[t] < 0 && alpha[t] > 0);
        bool low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C[t]);
        if (up && v > m) m = v;
        if (low && v < M) M = v;
    }
    SvmModel model;
    model.params = params;
    if (std::isfinite(m) && std::isfinite(M)) model.bias = 0.5 * (m + M);
    else if (std::isfinite(m)) model.bias = m;
    else if (std::isfinite(M)) model.bias = M;

    double sum_alpha = 0.0, alpha_g = 0.0;
    for (int t = 0; t < n; t++) {
        sum_alpha += alpha[t];
        alpha_g += alpha[t] * G[t];
    }
    model.dual_objective = 0.5 * (sum_alpha - alpha_g);

    for (int t = 0; t < n; t++) {
        if (alpha[t] > 1e-12) {
            model.support_vectors.push_back(data.examples[t].x);
            model.coefficients.push_back(alpha[t] * y[t]);
        }
    }
    model.trained = true;
    return model;
}

inline double decision_value(const SvmModel& model, const FeatureVector& x) {
    if (!model.trained) throw std::logic_error("decision_value: model not trained");
    double f = model.bias;
    for (size_t i = 0; i < model.support_vectors.size(); i++)
        f += model.coefficients[i] * rbf_kernel(model.params.gamma, model.support_vectors[i], x);
    return f;
}

inline double decision_distance(const SvmModel& model, const FeatureVector& x) {
    return std::abs(decision_value(model, x));
}

// Exactly-zero decision values classify negative (predict failure).
inline bool classify_positive(const SvmModel& model, const FeatureVector& x) {
    return decision_value(model, x) > 0.0;
}

inline double balanced_accuracy(const SvmModel& model, const std::vector<Example>& test) {
    int tp = 0, fn = 0, tn = 0, fp = 0;
    for (const auto& e : test) {
        bool pos = classify_positive(model, e.x);
        if (e.label > 0) (pos ? tp : fn)++;
        else (pos ? fp : tn)++;
    }
    double tpr = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    double tnr = tn + fp > 0 ? static_cast<double>(tn) / (tn + fp) : 0.0;
    return 0.5 * (tpr + tnr);
}

struct GridCell {
    double gamma = 0.0;
    double cost = 0.0;
    double score = 0.0;
};

struct GridSearchResult {
    SvmParams best;
    double best_score = 0.0;
    std::vector<GridCell> table;
};

inline std::vector<double> default_gamma_grid() {
    std::vector<double> g;
    for (int e = -15; e <= 3; e += 2) g.push_back(std::ldexp(1.0, e));
    return g;
}

inline std::vector<double> default_cost_grid() {
    std::vector<double> c;
    for (int e = -5; e <= 15; e += 2) c.push_back(std::ldexp(1.0, e));
    return c;
}

// Deterministic half split (even indices train, odd test), balanced accuracy
// on the held-out half, ties toward smaller gamma then smaller cost.
inline GridSearchResult grid_search(const LabeledDataset& pool,
                                    const std::vector<double>& gamma_grid,
                                    const std::vector<double>& cost_grid,
                                    const SvmParams& base = SvmParams()) {
    if (gamma_grid.empty() || cost_grid.empty())
        throw std::invalid_argument("grid_search: empty grid");
    LabeledDataset train_half, test_half;
    train_half.behavior = pool.behavior;
    test_half.behavior = pool.behavior;
    for (size_t i = 0; i < pool.examples.size(); i++)
        (i % 2 == 0 ? train_half : test_half).examples.push_back(pool.examples[i]);
    if (train_half.positives() == 0 || train_half.negatives() == 0 ||
        test_half.positives() == 0 || test_half.negatives() == 0)
        throw std::invalid_argument("grid_search: degenerate pool (a half lacks a class)");

    GridSearchResult res;
    res.best_score = -1.0;
    for (double g : gamma_grid) {
        for (double c : cost_grid) {
            SvmParams p = base;
            p.gamma = g;
            p.cost_neg = c;
            p.cost_pos = 0.0;  // keep the #neg/#pos ratio at this cost scale
            SvmModel model = train(train_half, p);
            double score = balanced_accuracy(model, test_half.examples);
            res.table.push_back({g, c, score});
            if (score > res.best_score + 1e-12) {
                res.best_score = score;
                res.best = p;  // cost_pos stays auto so the ratio tracks later data
            }
        }
    }
    return res;
}

inline constexpr char kSvmMagic[8] = {'A', 'L', 'S', 'V', 'M', 'M', '0', '1'};

inline void save_svm_model(std::ostream& out, const SvmModel& m) {
    write_magic(out, kSvmMagic);
    write_pod<uint32_t>(out, 1);
    write_pod<double>(out, m.params.gamma);
    write_pod<double>(out, m.params.cost_neg);
    write_pod<double>(out, m.params.cost_pos);
    write_pod<double>(out, m.params.tol);
    write_pod<uint64_t>(out, static_cast<uint64_t>(m.params.max_iter));
    write_pod<uint64_t>(out, static_cast<uint64_t>(m.support_vectors.size()));
    write_pod<uint64_t>(out, static_cast<uint64_t>(kFeatureDim));
    for (const auto& sv : m.support_vectors) {
        write_f64_array(out, sv.values.data(), kFeatureDim);
        write_f64_array(out, sv.point.data(), 3);
        write_pod<int32_t>(out, sv.u);
        write_pod<int32_t>(out, sv.v);
    }
    for (double c : m.coefficients) write_pod<double>(out, c);
    write_pod<double>(out, m.bias);
    write_pod<double>(out, m.dual_objective);
}

inline SvmModel load_svm_model(std::istream& in) {
    expect_magic(in, kSvmMagic, "svm-model");
    expect_version(in, 1, "svm-model");
    SvmModel m;
    m.params.gamma = read_pod<double>(in);
    m.params.cost_neg = read_pod<double>(in);
    m.params.cost_pos = read_pod<double>(in);
    m.params.tol = read_pod<double>(in);
    m.params.max_iter = static_cast<int>(read_pod<uint64_t>(in));
    uint64_t n_sv = read_pod<uint64_t>(in);
    uint64_t dim = read_pod<uint64_t>(in);
    if (dim != kFeatureDim) throw std::runtime_error("svm-model: feature dimension mismatch");
    if (n_sv > (1ull << 24)) throw std::runtime_error("svm-model: unreasonable SV count");
    m.support_vectors.resize(n_sv);
    for (auto& sv : m.support_vectors) {
        read_f64_array(in, sv.values.data(), kFeatureDim);
        read_f64_array(in, sv.point.data(), 3);
        sv.u = read_pod<int32_t>(in);
        sv.v = read_pod<int32_t>(in);
    }
    m.coefficients.resize(n_sv);
    for (auto& c : m.coefficients) c = read_pod<double>(in);
    m.bias = read_pod<double>(in);
    m.dual_objective = read_pod<double>(in);
    m.trained = true;
    return m;
}

// Dataset persistence: CSV, one row = label, x, y, z, then the 50 feature values.
inline void save_dataset_csv(std::ostream& out, const LabeledDataset& data) {
    for (const auto& e : data.examples) {
        out << (e.label > 0 ? "1" : "-1") << ',' << format_g17(e.x.point.x()) << ','
            << format_g17(e.x.point.y()) << ',' << format_g17(e.x.point.z());
        for (int i = 0; i < kFeatureDim; i++) out << ',' << format_g17(e.x.values[i]);
        out << '\n';
    }
}

inline LabeledDataset load_dataset_csv(std::istream& in, const std::string& behavior = "") {
    LabeledDataset data;
    data.behavior = behavior;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::logic_error&) {
                throw std::runtime_error("dataset csv line " + std::to_string(line_no) +
                                         ": bad number '" + cell + "'");
            }
        }
        if (vals.size() != 4 + kFeatureDim)
            throw std::runtime_error("dataset csv line " + std::to_string(line_no) +
                                     ": expected " + std::to_string(4 + kFeatureDim) + " cells");
        Example e;
        e.label = vals[0] > 0 ? 1 : -1;
        e.x.point = Vec3(vals[1], vals[2], vals[3]);
        for (int i = 0; i < kFeatureDim; i++) e.x.values[i] = vals[4 + i];
        data.examples.push_back(e);
    }
    return data;
}

}  // namespace actlearn
