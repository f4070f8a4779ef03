#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "actlearn/svm.hpp"

namespace actlearn {

// Unlabeled candidates for one visit. Instances carry their source 3D point
// and pixel; consumed entries are never re-picked.
struct CandidatePool {
    std::vector<FeatureVector> instances;
    std::vector<char> consumed;

    explicit CandidatePool(std::vector<FeatureVector> inst = {})
        : instances(std::move(inst)), consumed(instances.size(), 0) {}

    size_t remaining() const {
        size_t n = 0;
        for (char c : consumed) n += c ? 0 : 1;
        return n;
    }

    void consume(size_t idx) {
        if (idx >= instances.size()) throw std::out_of_range("pool consume: bad index");
        consumed[idx] = 1;
    }
};

struct PickResult {
    bool converged = true;
    size_t index = 0;
    double distance = 0.0;
};

// Closest-to-boundary selection with the support-vector guard: pick the
// unconsumed candidate minimizing d(x) = |f(x)| subject to d(x) being strictly
// below the smallest support-vector distance; none qualifying means the
// active learner has converged on this pool. Ties break to the lowest index.
inline PickResult svm_pick(const SvmModel& model, const CandidatePool& pool) {
    if (!model.trained) throw std::logic_error("svm_pick: model not trained");
    double guard = std::numeric_limits<double>::infinity();
    for (const auto& sv : model.support_vectors)
        guard = std::min(guard, decision_distance(model, sv));
    PickResult res;
    double best = guard;
    for (size_t i = 0; i < pool.instances.size(); i++) {
        if (pool.consumed[i]) continue;
        double d = decision_distance(model, pool.instances[i]);
        if (d < best) {
            best = d;
            res.converged = false;
            res.index = i;
            res.distance = d;
        }
    }
    return res;
}

// Append a verified label and retrain from scratch; the positive-class cost
// refreshes to #neg/#pos automatically while params.cost_pos is 0.
inline SvmModel add_and_retrain(LabeledDataset& data, const FeatureVector& instance, int label,
                                const SvmParams& params) {
    data.examples.push_back({instance, label});
    return train(data, params);
}

// Per-behavior bookkeeping across the practice poses.
struct ConvergenceState {
    std::vector<char> pose_converged;
    int labels_this_visit = 0;

    explicit ConvergenceState(int poses = 8) : pose_converged(poses, 0) {}

    bool all_converged() const {
        for (char c : pose_converged) if (!c) return false;
        return true;
    }
};

// Convergence check for one pose against a fresh pool; the flag is sticky so
// a retired pose stays retired.
inline bool visit_converged(ConvergenceState& state, int pose_idx, const CandidatePool& pool,
                            const SvmModel& model) {
    if (pose_idx < 0 || pose_idx >= static_cast<int>(state.pose_converged.size()))
        throw std::out_of_range("visit_converged: bad pose index");
    if (!state.pose_converged[pose_idx] && svm_pick(model, pool).converged)
        state.pose_converged[pose_idx] = 1;
    return state.pose_converged[pose_idx] != 0;
}

}  // namespace actlearn
