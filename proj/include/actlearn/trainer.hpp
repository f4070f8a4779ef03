#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "actlearn/active.hpp"
#include "actlearn/config.hpp"
#include "actlearn/device.hpp"
#include "actlearn/features.hpp"
#include "actlearn/kde.hpp"
#include "actlearn/scene.hpp"
#include "actlearn/svm.hpp"
#include "actlearn/trace.hpp"

namespace actlearn {

// The simulated environment: one device on one wall.
struct World {
    ScenarioConfig cfg;
    SimDevice device;

    Observation observe(const Pose2& pose) const {
        return capture(generate_scene(cfg, device), pose, cfg);
    }
};

inline World make_world(const ScenarioConfig& cfg, uint64_t master_seed) {
    cfg.validate();
    return World{cfg, make_device(cfg, master_seed)};
}

// Learning state for one complementary behavior pair on one device.
struct BehaviorPairSession {
    std::array<std::string, 2> tags;
    std::array<LabeledDataset, 2> datasets;
    std::array<SvmModel, 2> models;
    std::array<PcaBasis, 2> bases;
    std::array<SvmParams, 2> svm_params;
    std::array<ConvergenceState, 2> conv;
    Vec3 seed_point = Vec3::Zero();
    Pose2 nominal_pose;
    std::vector<Pose2> practice_poses;
    bool initialized = false;
};

inline BehaviorId applicable_behavior(const SimDevice& d) {
    return d.state ? BehaviorId::kComplement : BehaviorId::kPrimary;
}

// Practice poses ring: waypoints the robot travels to between approaches.
// Deterministic function of the nominal pose.
inline std::vector<Pose2> make_practice_poses(const Pose2& nominal, int count) {
    std::vector<Pose2> poses;
    for (int i = 0; i < count; i++) {
        double t = count > 1 ? static_cast<double>(i) / (count - 1) : 0.5;
        double angle = M_PI * (0.75 + 0.5 * t);  // behind the nominal pose
        double r = 1.5;
        Pose2 p;
        p.x = nominal.x + r * std::cos(angle);
        p.y = nominal.y + r * std::sin(angle);
        p.heading = normalize_angle(std::atan2(nominal.y - p.y, nominal.x - p.x));
        poses.push_back(p);
    }
    return poses;
}

struct VisitBudget {
    int used = 0;
    int cap = 6;
    bool exhausted() const { return used >= cap; }
};

// Sample candidates from the cloud, extract patches once, and project through
// a behavior's basis into an active-learning pool.
inline CandidatePool build_pool(const Observation& obs, const Vec3& center,
                                const PcaBasis& basis, const ScenarioConfig& cfg,
                                RngStream& rng) {
    SamplerParams sp;
    sp.mean = center;
    sp.variance = Vec3(cfg.sampler_var_x, cfg.sampler_var_y, cfg.sampler_var_z);
    sp.count = cfg.candidate_count;
    std::vector<size_t> idxs = sample_candidate_indices(obs.cloud, sp, rng);
    std::vector<FeatureVector> instances;
    instances.reserve(idxs.size());
    for (size_t i : idxs) {
        const CloudPoint& cp = obs.cloud[i];
        FeatureVector f = project(basis, extract_patch_vector(obs.rgb, cp.u, cp.v));
        f.point = cp.p;
        f.u = cp.u;
        f.v = cp.v;
        instances.push_back(std::move(f));
    }
    return CandidatePool(std::move(instances));
}

// Same sampling and extraction, projected through both bases (index-aligned
// pools) so a visit's shared candidate draw feeds both behaviors.
inline std::array<CandidatePool, 2> build_pool_pair(const Observation& obs, const Vec3& center,
                                                    const BehaviorPairSession& session,
                                                    const ScenarioConfig& cfg, RngStream& rng) {
    SamplerParams sp;
    sp.mean = center;
    sp.variance = Vec3(cfg.sampler_var_x, cfg.sampler_var_y, cfg.sampler_var_z);
    sp.count = cfg.candidate_count;
    std::vector<size_t> idxs = sample_candidate_indices(obs.cloud, sp, rng);
    std::array<std::vector<FeatureVector>, 2> inst;
    for (size_t i : idxs) {
        const CloudPoint& cp = obs.cloud[i];
        Eigen::VectorXd raw = extract_patch_vector(obs.rgb, cp.u, cp.v);
        for (int b = 0; b < 2; b++) {
            FeatureVector f = project(session.bases[b], raw);
            f.point = cp.p;
            f.u = cp.u;
            f.v = cp.v;
            inst[b].push_back(std::move(f));
        }
    }
    return {CandidatePool(std::move(inst[0])), CandidatePool(std::move(inst[1]))};
}

struct InitializationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Initialization per the autonomous protocol: spherical-Gaussian sampling
// around the user-designated seed, executing whichever behavior the world
// state admits, until both datasets hold a positive and a negative example.
inline void initialize(BehaviorPairSession& session, World& world, const Vec3& seed_point,
                       RngStream& rng, TraceLog& trace) {
    const ScenarioConfig& cfg = world.cfg;
    session.seed_point = seed_point;
    session.nominal_pose = cfg.nominal_pose;
    session.practice_poses = make_practice_poses(cfg.nominal_pose, cfg.practice_poses);
    for (int b = 0; b < 2; b++) {
        session.tags[b] = behavior_tag(cfg.kind, static_cast<BehaviorId>(b));
        session.datasets[b].behavior = session.tags[b];
        session.conv[b] = ConvergenceState(cfg.practice_poses);
    }

    Observation obs = world.observe(session.nominal_pose);
    trace.line("init-start state=" + std::string(world.device.state ? "1" : "0") +
               " seed=" + TraceLog::fmt_point(seed_point));

    // PCA bases from the first observation's candidate raw vectors; frozen.
    {
        SamplerParams sp;
        sp.mean = seed_point;
        sp.variance = Vec3(cfg.sampler_var_x, cfg.sampler_var_y, cfg.sampler_var_z);
        sp.count = cfg.candidate_count;
        std::vector<size_t> idxs = sample_candidate_indices(obs.cloud, sp, rng);
        std::vector<Eigen::VectorXd> raws;
        raws.reserve(idxs.size());
        for (size_t i : idxs)
            raws.push_back(extract_patch_vector(obs.rgb, obs.cloud[i].u, obs.cloud[i].v));
        PcaBasis basis = fit_pca(raws, kFeatureDim, session.tags[0]);
        session.bases[0] = basis;
        session.bases[1] = basis;
        session.bases[1].behavior = session.tags[1];

        double gamma = cfg.gamma;
        if (gamma <= 0.0) {
            std::vector<FeatureVector> feats;
            feats.reserve(raws.size());
            for (const auto& r : raws) feats.push_back(project(basis, r));
            gamma = auto_gamma(feats);
        }
        for (int b = 0; b < 2; b++) {
            session.svm_params[b].gamma = gamma;
            session.svm_params[b].cost_neg = cfg.cost_neg;
            session.svm_params[b].cost_pos = cfg.cost_pos;
            session.svm_params[b].tol = cfg.svm_tol;
            session.svm_params[b].max_iter = cfg.svm_max_iter;
        }
        trace.line("init-pca rank=" + std::to_string(basis.rank()) +
                   " gamma=" + format_f(gamma, 9));
    }

    VerifierConfig ver = make_verifier(cfg);
    SamplerParams init_sp;
    init_sp.mean = seed_point;
    init_sp.variance = Vec3::Constant(cfg.init_sigma * cfg.init_sigma);
    init_sp.count = 1;

    auto complete = [&] {
        for (int b = 0; b < 2; b++)
            if (session.datasets[b].positives() < 1 || session.datasets[b].negatives() < 1)
                return false;
        return true;
    };

    int iter = 0;
    while (!complete()) {
        if (iter >= cfg.init_cap) {
            trace.line("init-failed iterations=" + std::to_string(iter));
            throw InitializationFailure(
                "initialization cap (" + std::to_string(cfg.init_cap) +
                ") exceeded before both behaviors held a positive and a negative example; "
                "is the seed point on the device?");
        }
        BehaviorId b = applicable_behavior(world.device);
        size_t ci = sample_candidate_indices(obs.cloud, init_sp, rng)[0];
        const CloudPoint& cp = obs.cloud[ci];
        FeatureVector fv = project(session.bases[behavior_index(b)],
                                   extract_patch_vector(obs.rgb, cp.u, cp.v));
        fv.point = cp.p;
        fv.u = cp.u;
        fv.v = cp.v;

        BehaviorOutcome outcome = execute_behavior(world.device, b, cp.p);
        Observation after = outcome.success ? world.observe(session.nominal_pose) : obs;
        bool ok = verify(ver, obs.rgb, after.rgb, {outcome.success, outcome.gripper_travel});
        session.datasets[behavior_index(b)].examples.push_back({fv, ok ? 1 : -1});
        trace.line("init behavior=" + session.tags[behavior_index(b)] +
                   " point=" + TraceLog::fmt_point(cp.p) + " label=" +
                   (ok ? "+1" : "-1"));
        obs = after;
        iter++;
    }
    for (int b = 0; b < 2; b++)
        session.models[b] = train(session.datasets[b], session.svm_params[b]);
    session.initialized = true;
    trace.line("init-done labels=" + std::to_string(session.datasets[0].size()) + "+" +
               std::to_string(session.datasets[1].size()));
}

struct SelectResult {
    bool found = false;
    size_t index = 0;          // chosen candidate within the pool
    Vec3 point = Vec3::Zero();  // its 3D location (cloud point nearest the mode)
    Vec3 mode = Vec3::Zero();   // the KDE mode itself
};

// KDE execution-point selection over a candidate pool: fit a Gaussian KDE to
// the positively classified points, hill-climb to the mode, and return the
// nearest unconsumed candidate.
inline SelectResult select_execution_index(const SvmModel& model, const CandidatePool& pool,
                                           double kde_bandwidth) {
    std::vector<Vec3> positives;
    for (size_t i = 0; i < pool.instances.size(); i++) {
        if (pool.consumed[i]) continue;
        if (classify_positive(model, pool.instances[i])) positives.push_back(pool.instances[i].point);
    }
    SelectResult res;
    if (positives.empty()) return res;
    Vec3 mode = positives[0];
    if (positives.size() > 1) {
        Kde kde = fit_kde(positives, kde_bandwidth);
        mode = kde_mode(kde, positives);
    }
    double best = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pool.instances.size(); i++) {
        if (pool.consumed[i]) continue;
        double d = (pool.instances[i].point - mode).squaredNorm();
        if (d < best) {
            best = d;
            res.index = i;
        }
    }
    res.found = true;
    res.mode = mode;
    res.point = pool.instances[res.index].point;
    return res;
}

// Spec-shaped wrapper: selection from a fresh observation.
inline SelectResult select_execution_point(const SvmModel& model, const Observation& obs,
                                           const PcaBasis& basis, const Vec3& center,
                                           const ScenarioConfig& cfg, RngStream& rng) {
    CandidatePool pool = build_pool(obs, center, basis, cfg, rng);
    return select_execution_index(model, pool, cfg.kde_bandwidth);
}

struct AttemptRecord {
    Vec3 point = Vec3::Zero();
    bool success = false;
    bool retrained = false;
};

struct ExecutionReport {
    int attempts = 0;
    bool success = false;
    bool no_positive = false;
    Vec3 returned_point = Vec3::Zero();  // Eq. 1 second output of the successful attempt
    std::vector<AttemptRecord> records;
};

// Shared execution core: select via KDE, execute, verify, append the label,
// retrain, and retry from the originally computed candidates. Used by the
// runtime execute_with_retry and by training-time state toggles (which also
// charge the visit budget).
inline ExecutionReport run_execution(BehaviorPairSession& session, World& world,
                                     Observation& cur_obs, const Pose2& view_pose, BehaviorId b,
                                     CandidatePool& pool, int max_attempts, VisitBudget* budget,
                                     TraceLog* trace, int pose_idx) {
    const int bi = behavior_index(b);
    VerifierConfig ver = make_verifier(world.cfg);
    ExecutionReport report;
    while (report.attempts < max_attempts) {
        if (budget && budget->exhausted()) break;
        if (!is_start_state(world.device, b)) break;
        SelectResult sel = select_execution_index(session.models[bi], pool, world.cfg.kde_bandwidth);
        if (!sel.found) {
            report.no_positive = true;
            break;
        }
        const FeatureVector fv = pool.instances[sel.index];
        BehaviorOutcome outcome = execute_behavior(world.device, b, fv.point);
        Observation after = outcome.success ? world.observe(view_pose) : cur_obs;
        bool ok = verify(ver, cur_obs.rgb, after.rgb, {outcome.success, outcome.gripper_travel});
        session.models[bi] =
            add_and_retrain(session.datasets[bi], fv, ok ? 1 : -1, session.svm_params[bi]);
        if (budget) budget->used++;
        if (trace)
            trace->line("exec pose=" + std::to_string(pose_idx) + " behavior=" + session.tags[bi] +
                        " attempt=" + std::to_string(report.attempts + 1) +
                        " point=" + TraceLog::fmt_point(fv.point) + " label=" +
                        (ok ? "+1" : "-1") + " pool=" + std::to_string(pool.remaining() - 1));
        pool.consume(sel.index);
        report.records.push_back({fv.point, ok, true});
        report.attempts++;
        cur_obs = after;
        if (ok) {
            report.success = true;
            report.returned_point = outcome.returned_point;
            break;
        }
    }
    return report;
}

// Runtime behavior execution with retry. Every attempt re-approaches the
// device from a fresh noisy pose and recomputes the candidate pool from the
// new observation; failures are appended as negatives and the model retrained
// before the next approach. A view with no positively classified candidate
// still consumes an attempt.
inline ExecutionReport execute_with_retry(BehaviorPairSession& session, World& world, BehaviorId b,
                                          RngStream& rng, int max_attempts, TraceLog* trace = nullptr) {
    if (!session.initialized) throw std::logic_error("execute_with_retry: session not initialized");
    PoseNoise noise{world.cfg.pose_std_x, world.cfg.pose_std_y};
    ExecutionReport report;
    while (report.attempts < max_attempts) {
        Pose2 arrival = sample_approach_pose(session.nominal_pose, noise, rng);
        Observation obs = world.observe(arrival);
        CandidatePool pool =
            build_pool(obs, session.seed_point, session.bases[behavior_index(b)], world.cfg, rng);
        ExecutionReport one = run_execution(session, world, obs, arrival, b, pool, 1, nullptr, trace, -1);
        report.attempts++;
        report.no_positive = one.no_positive;
        if (!one.records.empty()) report.records.push_back(one.records.front());
        if (one.success) {
            report.success = true;
            report.returned_point = one.returned_point;
            break;
        }
    }
    return report;
}

namespace detail {

struct PracticeResult {
    bool succeeded_once = false;
};

// Algorithm-1 practice loop over a fixed candidate pool. On each success of
// the outer behavior, recursively practices the complement from the returned
// offset point with the stop-on-first-success rule, restoring the world state
// for the next outer pick.
inline PracticeResult practice_on_pool(BehaviorPairSession& session, World& world,
                                       Observation& cur_obs, const Pose2& view_pose,
                                       BehaviorId b, CandidatePool& pool,
                                       bool stop_on_first_success, VisitBudget& budget,
                                       int pose_idx, RngStream& rng, TraceLog& trace);

inline PracticeResult practice_at(BehaviorPairSession& session, World& world,
                                  Observation& cur_obs, const Pose2& view_pose, BehaviorId b,
                                  const Vec3& center, bool stop_on_first_success,
                                  VisitBudget& budget, int pose_idx, RngStream& rng,
                                  TraceLog& trace) {
    CandidatePool pool =
        build_pool(cur_obs, center, session.bases[behavior_index(b)], world.cfg, rng);
    return practice_on_pool(session, world, cur_obs, view_pose, b, pool, stop_on_first_success,
                            budget, pose_idx, rng, trace);
}

inline PracticeResult practice_on_pool(BehaviorPairSession& session, World& world,
                                       Observation& cur_obs, const Pose2& view_pose,
                                       BehaviorId b, CandidatePool& pool,
                                       bool stop_on_first_success, VisitBudget& budget,
                                       int pose_idx, RngStream& rng, TraceLog& trace) {
    const int bi = behavior_index(b);
    VerifierConfig ver = make_verifier(world.cfg);
    PracticeResult result;
    while (true) {
        if (budget.exhausted()) {
            trace.line("practice-end pose=" + std::to_string(pose_idx) + " behavior=" +
                       session.tags[bi] + " reason=budget");
            return result;
        }
        // World-state safety: never execute against a wrong-state device.
        if (!is_start_state(world.device, b)) {
            trace.line("practice-end pose=" + std::to_string(pose_idx) + " behavior=" +
                       session.tags[bi] + " reason=wrong-state");
            return result;
        }
        PickResult pick = svm_pick(session.models[bi], pool);
        if (pick.converged) {
            trace.line("practice-end pose=" + std::to_string(pose_idx) + " behavior=" +
                       session.tags[bi] + " reason=converged");
            return result;
        }
        const FeatureVector fv = pool.instances[pick.index];
        BehaviorOutcome outcome = execute_behavior(world.device, b, fv.point);
        Observation after = outcome.success ? world.observe(view_pose) : cur_obs;
        bool ok = verify(ver, cur_obs.rgb, after.rgb, {outcome.success, outcome.gripper_travel});
        session.models[bi] =
            add_and_retrain(session.datasets[bi], fv, ok ? 1 : -1, session.svm_params[bi]);
        budget.used++;
        trace.pick(pose_idx, session.tags[bi], fv.point, pick.distance, ok ? 1 : -1,
                   pool.remaining() - 1);
        pool.consume(pick.index);
        cur_obs = after;
        if (!ok) continue;

        result.succeeded_once = true;
        if (stop_on_first_success) return result;

        // Flip-flop: practice the complement from the returned offset point.
        trace.line("flip-flop pose=" + std::to_string(pose_idx) + " from=" + session.tags[bi] +
                   " hint=" + TraceLog::fmt_point(outcome.returned_point));
        PracticeResult comp = practice_at(session, world, cur_obs, view_pose, complement_of(b),
                                          outcome.returned_point, true, budget, pose_idx, rng,
                                          trace);
        if (!comp.succeeded_once && !budget.exhausted() && is_start_state(world.device, complement_of(b))) {
            // The complement refused (converged) without restoring the state;
            // execute it at its best point so the outer behavior can continue.
            CandidatePool toggle_pool = build_pool(
                cur_obs, session.seed_point, session.bases[behavior_index(complement_of(b))],
                world.cfg, rng);
            ExecutionReport rep = run_execution(session, world, cur_obs, view_pose,
                                                complement_of(b), toggle_pool, 3, &budget, &trace,
                                                pose_idx);
            if (!rep.success) {
                trace.line("practice-end pose=" + std::to_string(pose_idx) + " behavior=" +
                           session.tags[bi] + " reason=unrestored");
                return result;
            }
        }
    }
}

}  // namespace detail

struct TrainResult {
    bool converged = false;
    int visits = 0;
    std::array<int, 2> labels{0, 0};
    std::string stop_reason;
};

// The 8-pose round-robin training loop: approach with pose noise, check both
// behaviors' convergence on arrival, and practice whichever applicable
// behavior still needs labels. Poses retire once both behaviors converge
// there; training ends when every pose is retired or a cap trips.
inline TrainResult train_to_convergence(BehaviorPairSession& session, World& world,
                                        RngStream& practice_rng, RngStream& approach_rng,
                                        TraceLog& trace) {
    if (!session.initialized) throw std::logic_error("train_to_convergence: not initialized");
    const ScenarioConfig& cfg = world.cfg;
    const int n_poses = cfg.practice_poses;
    PoseNoise noise{cfg.pose_std_x, cfg.pose_std_y};
    TrainResult result;
    int pose_cursor = -1;
    int fruitless_visits = 0;

    auto all_done = [&] {
        return session.conv[0].all_converged() && session.conv[1].all_converged();
    };

    while (!all_done()) {
        if (static_cast<int>(session.datasets[0].size()) >= cfg.label_cap ||
            static_cast<int>(session.datasets[1].size()) >= cfg.label_cap) {
            result.stop_reason = "label-cap";
            break;
        }
        if (fruitless_visits > 2 * n_poses) {
            result.stop_reason = "stalled";
            break;
        }
        // Next unretired pose, round-robin.
        int pose = -1;
        for (int k = 1; k <= n_poses; k++) {
            int cand = (pose_cursor + k) % n_poses;
            if (!session.conv[0].pose_converged[cand] || !session.conv[1].pose_converged[cand]) {
                pose = cand;
                break;
            }
        }
        if (pose < 0) break;  // defensive: all_done should have caught this
        pose_cursor = pose;

        Pose2 arrival = sample_approach_pose(session.nominal_pose, noise, approach_rng);
        Observation obs = world.observe(arrival);
        BehaviorId b = applicable_behavior(world.device);
        const int bi = behavior_index(b);
        const int ci = behavior_index(complement_of(b));
        trace.line("visit n=" + std::to_string(result.visits) + " pose=" + std::to_string(pose) +
                   " state=" + (world.device.state ? "1" : "0") + " arrival=(" +
                   format_f(arrival.x) + "," + format_f(arrival.y) + "," +
                   format_f(arrival.heading) + ")");

        size_t labels_before = session.datasets[0].size() + session.datasets[1].size();
        bool newly_converged = false;

        auto pools = build_pool_pair(obs, session.seed_point, session, cfg, practice_rng);
        for (int side = 0; side < 2; side++) {
            bool was = session.conv[side].pose_converged[pose] != 0;
            bool now = visit_converged(session.conv[side], pose, pools[side], session.models[side]);
            if (now && !was) {
                newly_converged = true;
                trace.line("converged pose=" + std::to_string(pose) +
                           " behavior=" + session.tags[side]);
            }
        }

        VisitBudget budget{0, cfg.visit_budget};
        if (!session.conv[bi].pose_converged[pose]) {
            Observation cur = obs;
            session.conv[bi].labels_this_visit = 0;
            detail::practice_on_pool(session, world, cur, arrival, b, pools[bi], false, budget,
                                     pose, practice_rng, trace);
        } else if (!session.conv[ci].pose_converged[pose]) {
            // The applicable behavior is done at this pose but its complement
            // still needs practice: execute the applicable behavior once at
            // its best point purely to flip the world state.
            Observation cur = obs;
            trace.line("toggle pose=" + std::to_string(pose) + " via=" + session.tags[bi]);
            ExecutionReport rep = run_execution(session, world, cur, arrival, b, pools[bi], 3,
                                                &budget, &trace, pose);
            if (rep.success && !budget.exhausted()) {
                detail::practice_at(session, world, cur, arrival, complement_of(b),
                                    rep.returned_point, false, budget, pose, practice_rng, trace);
            }
        }

        size_t labels_after = session.datasets[0].size() + session.datasets[1].size();
        if (labels_after == labels_before && !newly_converged) fruitless_visits++;
        else fruitless_visits = 0;
        result.visits++;
    }

    result.converged = all_done();
    if (result.converged) result.stop_reason = "converged";
    else if (result.stop_reason.empty()) result.stop_reason = "label-cap";
    result.labels[0] = static_cast<int>(session.datasets[0].size());
    result.labels[1] = static_cast<int>(session.datasets[1].size());
    trace.line("train-done converged=" + std::string(result.converged ? "1" : "0") + " visits=" +
               std::to_string(result.visits) + " labels=" + std::to_string(result.labels[0]) +
               "+" + std::to_string(result.labels[1]) + " reason=" + result.stop_reason);
    return result;
}

inline constexpr char kSessionMagic[8] = {'A', 'L', 'S', 'E', 'S', 'S', '0', '1'};

inline void save_session(std::ostream& out, const BehaviorPairSession& s) {
    write_magic(out, kSessionMagic);
    write_pod<uint32_t>(out, 1);
    write_pod<uint8_t>(out, s.initialized ? 1 : 0);
    write_f64_array(out, s.seed_point.data(), 3);
    write_pod<double>(out, s.nominal_pose.x);
    write_pod<double>(out, s.nominal_pose.y);
    write_pod<double>(out, s.nominal_pose.heading);
    write_pod<uint32_t>(out, static_cast<uint32_t>(s.practice_poses.size()));
    for (const auto& p : s.practice_poses) {
        write_pod<double>(out, p.x);
        write_pod<double>(out, p.y);
        write_pod<double>(out, p.heading);
    }
    for (int b = 0; b < 2; b++) {
        write_string(out, s.tags[b]);
        write_pod<double>(out, s.svm_params[b].gamma);
        write_pod<double>(out, s.svm_params[b].cost_neg);
        write_pod<double>(out, s.svm_params[b].cost_pos);
        write_pod<double>(out, s.svm_params[b].tol);
        write_pod<uint64_t>(out, static_cast<uint64_t>(s.svm_params[b].max_iter));
        write_pod<uint32_t>(out, static_cast<uint32_t>(s.conv[b].pose_converged.size()));
        for (char c : s.conv[b].pose_converged) write_pod<uint8_t>(out, c ? 1 : 0);
        save_pca_basis(out, s.bases[b]);
        save_svm_model(out, s.models[b]);
        std::ostringstream csv;
        save_dataset_csv(csv, s.datasets[b]);
        write_string(out, csv.str());
    }
}

inline BehaviorPairSession load_session(std::istream& in) {
    expect_magic(in, kSessionMagic, "session-checkpoint");
    expect_version(in, 1, "session-checkpoint");
    BehaviorPairSession s;
    s.initialized = read_pod<uint8_t>(in) != 0;
    read_f64_array(in, s.seed_point.data(), 3);
    s.nominal_pose.x = read_pod<double>(in);
    s.nominal_pose.y = read_pod<double>(in);
    s.nominal_pose.heading = read_pod<double>(in);
    uint32_t n_poses = read_pod<uint32_t>(in);
    if (n_poses > 1024) throw std::runtime_error("session-checkpoint: unreasonable pose count");
    s.practice_poses.resize(n_poses);
    for (auto& p : s.practice_poses) {
        p.x = read_pod<double>(in);
        p.y = read_pod<double>(in);
        p.heading = read_pod<double>(in);
    }
    for (int b = 0; b < 2; b++) {
        s.tags[b] = read_string(in);
        s.svm_params[b].gamma = read_pod<double>(in);
        s.svm_params[b].cost_neg = read_pod<double>(in);
        s.svm_params[b].cost_pos = read_pod<double>(in);
        s.svm_params[b].tol = read_pod<double>(in);
        s.svm_params[b].max_iter = static_cast<int>(read_pod<uint64_t>(in));
        uint32_t nc = read_pod<uint32_t>(in);
        if (nc != n_poses) throw std::runtime_error("session-checkpoint: flag count mismatch");
        s.conv[b] = ConvergenceState(static_cast<int>(nc));
        for (auto& c : s.conv[b].pose_converged) c = read_pod<uint8_t>(in) ? 1 : 0;
        s.bases[b] = load_pca_basis(in);
        s.models[b] = load_svm_model(in);
        std::istringstream csv(read_string(in));
        s.datasets[b] = load_dataset_csv(csv, s.tags[b]);
    }
    return s;
}

}  // namespace actlearn
