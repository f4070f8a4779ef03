#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "actlearn/config.hpp"
#include "actlearn/io.hpp"
#include "actlearn/svm.hpp"
#include "actlearn/trainer.hpp"

namespace actlearn {

// Everything a subcommand needs, echoed into the output directory so any run
// can be reproduced from its artifacts alone.
struct RunManifest {
    std::string command;
    std::string scenario_path;
    uint64_t seed = 0;
    std::string out_dir;
    std::string checkpoint_path;  // evaluate / heatmap
    std::string behavior;         // heatmap: tag, or empty for both
    int trials = 10;              // evaluate
    int max_attempts = 0;         // evaluate; 0 = scenario default
    int views = 10;               // gridsearch
    int grid_candidates = 60;     // gridsearch, per view

    std::string echo() const {
        std::string s;
        s += "command = " + command + "\n";
        s += "scenario = " + scenario_path + "\n";
        s += "seed = " + std::to_string(seed) + "\n";
        s += "out = " + out_dir + "\n";
        if (!checkpoint_path.empty()) s += "checkpoint = " + checkpoint_path + "\n";
        if (!behavior.empty()) s += "behavior = " + behavior + "\n";
        if (command == "evaluate") {
            s += "trials = " + std::to_string(trials) + "\n";
            s += "max_attempts = " + std::to_string(max_attempts) + "\n";
        }
        if (command == "gridsearch") {
            s += "views = " + std::to_string(views) + "\n";
            s += "grid_candidates = " + std::to_string(grid_candidates) + "\n";
        }
        return s;
    }
};

namespace detail {

inline void prepare_out_dir(const RunManifest& m) {
    if (m.out_dir.empty()) throw std::runtime_error("output directory not set");
    std::filesystem::create_directories(m.out_dir);
    write_file(m.out_dir + "/manifest.txt", m.echo());
}

}  // namespace detail

// Train to convergence and write checkpoint + trace + label-count table.
// Exit codes: 0 converged, 2 initialization failure, 3 non-convergence.
inline int cmd_train(const RunManifest& m, std::ostream& log = std::cout) {
    ScenarioConfig cfg = load_scenario_config(m.scenario_path);
    detail::prepare_out_dir(m);
    World world = make_world(cfg, m.seed);
    BehaviorPairSession session;
    TraceLog trace;
    RngStream init_rng = derive_stream(m.seed, RngPurpose::kInit);
    RngStream practice_rng = derive_stream(m.seed, RngPurpose::kPractice);
    RngStream approach_rng = derive_stream(m.seed, RngPurpose::kApproach);

    try {
        initialize(session, world, cfg.seed_point, init_rng, trace);
    } catch (const InitializationFailure& e) {
        trace.save(m.out_dir + "/trace.log");
        write_file(m.out_dir + "/error.txt", std::string(e.what()) + "\n");
        log << "initialization failed: " << e.what() << "\n";
        return 2;
    }
    TrainResult result = train_to_convergence(session, world, practice_rng, approach_rng, trace);
    trace.save(m.out_dir + "/trace.log");
    {
        std::ofstream out(m.out_dir + "/checkpoint.bin", std::ios::binary);
        save_session(out, session);
    }
    std::string table = "behavior,positive,negative,total\n";
    for (int b = 0; b < 2; b++) {
        const auto& d = session.datasets[b];
        table += d.behavior + "," + std::to_string(d.positives()) + "," +
                 std::to_string(d.negatives()) + "," + std::to_string(d.size()) + "\n";
    }
    write_file(m.out_dir + "/labels.csv", table);
    log << "train " << (result.converged ? "converged" : "stopped (" + result.stop_reason + ")")
        << " visits=" << result.visits << " labels=" << result.labels[0] << "+"
        << result.labels[1] << "\n";
    return result.converged ? 0 : 3;
}

struct EvalRow {
    std::string behavior;
    int first_try = 0;
    int second_try = 0;
    int failed = 0;
    int trials = 0;
};

// Evaluation protocol: per behavior, reset the device to that behavior's start
// state, execute with retry from a noisy approach, and discard everything the
// trial appended before the next trial.
inline std::array<EvalRow, 2> run_evaluation(BehaviorPairSession& session, World& world,
                                             int trials, int max_attempts, RngStream& rng) {
    std::array<EvalRow, 2> rows;
    for (int b = 0; b < 2; b++) {
        rows[b].behavior = session.tags[b];
        rows[b].trials = trials;
        for (int t = 0; t < trials; t++) {
            world.device.state = (b == 0) ? false : true;
            auto datasets = session.datasets;
            auto models = session.models;
            ExecutionReport rep =
                execute_with_retry(session, world, static_cast<BehaviorId>(b), rng, max_attempts);
            session.datasets = datasets;
            session.models = models;
            if (rep.success && rep.attempts == 1) rows[b].first_try++;
            else if (rep.success && rep.attempts == 2) rows[b].second_try++;
            else rows[b].failed++;
        }
    }
    return rows;
}

inline int cmd_evaluate(const RunManifest& m, std::ostream& log = std::cout) {
    ScenarioConfig cfg = load_scenario_config(m.scenario_path);
    if (m.checkpoint_path.empty()) throw std::runtime_error("evaluate: checkpoint not set");
    std::ifstream in(m.checkpoint_path, std::ios::binary);
    if (!in) throw std::runtime_error("evaluate: missing checkpoint " + m.checkpoint_path);
    BehaviorPairSession session = load_session(in);
    detail::prepare_out_dir(m);
    World world = make_world(cfg, m.seed);
    RngStream rng = derive_stream(m.seed, RngPurpose::kEvaluation);
    int attempts = m.max_attempts > 0 ? m.max_attempts : cfg.max_attempts;
    auto rows = run_evaluation(session, world, m.trials, attempts, rng);
    std::string csv = "behavior,first_try,second_try,failed,trials\n";
    for (const auto& r : rows) {
        csv += r.behavior + "," + std::to_string(r.first_try) + "," +
               std::to_string(r.second_try) + "," + std::to_string(r.failed) + "," +
               std::to_string(r.trials) + "\n";
        log << "evaluate " << r.behavior << ": first=" << r.first_try
            << " second=" << r.second_try << " failed=" << r.failed << "/" << r.trials << "\n";
    }
    write_file(m.out_dir + "/evaluation.csv", csv);
    return 0;
}

// Dense classification of cloud points around the device, rendered as a green
// overlay on the captured image.
inline int cmd_heatmap(const RunManifest& m, std::ostream& log = std::cout) {
    ScenarioConfig cfg = load_scenario_config(m.scenario_path);
    if (m.checkpoint_path.empty()) throw std::runtime_error("heatmap: checkpoint not set");
    std::ifstream in(m.checkpoint_path, std::ios::binary);
    if (!in) throw std::runtime_error("heatmap: missing checkpoint " + m.checkpoint_path);
    BehaviorPairSession session = load_session(in);
    detail::prepare_out_dir(m);
    World world = make_world(cfg, m.seed);

    for (int b = 0; b < 2; b++) {
        if (!m.behavior.empty() && m.behavior != session.tags[b]) continue;
        // The heatmap for a behavior is rendered in that behavior's start
        // state, the state in which it would actually be executed.
        world.device.state = (b == 0) ? false : true;
        Observation obs = world.observe(session.nominal_pose);
        Image img = obs.rgb;
        int half = cfg.cloud_stride / 2;
        size_t n_pos = 0, n_total = 0;
        for (const auto& cp : obs.cloud) {
            if (std::abs(cp.p.y() - cfg.device_pos.y()) > 0.25 ||
                std::abs(cp.p.z() - cfg.device_pos.z()) > 0.25)
                continue;
            n_total++;
            FeatureVector f = project(session.bases[b], extract_patch_vector(obs.rgb, cp.u, cp.v));
            if (!classify_positive(session.models[b], f)) continue;
            n_pos++;
            for (int dv = -half; dv <= half; dv++)
                for (int du = -half; du <= half; du++) {
                    if (!img.in_bounds(cp.u + du, cp.v + dv)) continue;
                    uint8_t& g = img.at(cp.u + du, cp.v + dv, 1);
                    uint8_t& r = img.at(cp.u + du, cp.v + dv, 0);
                    uint8_t& bl = img.at(cp.u + du, cp.v + dv, 2);
                    r = static_cast<uint8_t>(r / 2);
                    g = static_cast<uint8_t>(g / 2 + 128);
                    bl = static_cast<uint8_t>(bl / 2);
                }
        }
        std::string path = m.out_dir + "/heatmap_" + session.tags[b] + ".ppm";
        write_ppm(img, path);
        log << "heatmap " << session.tags[b] << ": " << n_pos << "/" << n_total
            << " grid points positive -> " << path << "\n";
    }
    return 0;
}

// The synthetic registered-views pool: candidates from several noisy views of
// the scene, labeled by ground-truth region membership for one behavior.
inline LabeledDataset build_registered_pool(World& world, BehaviorId b, int views,
                                            int per_view, uint64_t seed) {
    const ScenarioConfig& cfg = world.cfg;
    RngStream rng = derive_stream(seed, RngPurpose::kInit);
    PoseNoise noise{cfg.pose_std_x, cfg.pose_std_y};
    LabeledDataset pool;
    pool.behavior = behavior_tag(cfg.kind, b);
    PcaBasis basis;
    for (int v = 0; v < views; v++) {
        Pose2 pose = v == 0 ? cfg.nominal_pose
                            : sample_approach_pose(cfg.nominal_pose, noise, rng);
        Observation obs = world.observe(pose);
        SamplerParams sp;
        sp.mean = cfg.seed_point;
        sp.variance = Vec3(cfg.sampler_var_x, cfg.sampler_var_y, cfg.sampler_var_z);
        sp.count = per_view;
        std::vector<size_t> idxs = sample_candidate_indices(obs.cloud, sp, rng);
        std::vector<Eigen::VectorXd> raws;
        raws.reserve(idxs.size());
        for (size_t i : idxs)
            raws.push_back(extract_patch_vector(obs.rgb, obs.cloud[i].u, obs.cloud[i].v));
        if (v == 0) basis = fit_pca(raws, kFeatureDim, pool.behavior);
        for (size_t k = 0; k < idxs.size(); k++) {
            const CloudPoint& cp = obs.cloud[idxs[k]];
            FeatureVector f = project(basis, raws[k]);
            f.point = cp.p;
            f.u = cp.u;
            f.v = cp.v;
            bool inside = world.device.region(b).contains(cp.p - world.device.placement);
            pool.examples.push_back({f, inside ? 1 : -1});
        }
    }
    return pool;
}

inline int cmd_gridsearch(const RunManifest& m, std::ostream& log = std::cout) {
    ScenarioConfig cfg = load_scenario_config(m.scenario_path);
    detail::prepare_out_dir(m);
    World world = make_world(cfg, m.seed);
    LabeledDataset pool =
        build_registered_pool(world, BehaviorId::kPrimary, m.views, m.grid_candidates, m.seed);
    SvmParams base;
    base.tol = cfg.svm_tol;
    base.max_iter = cfg.svm_max_iter;
    GridSearchResult res = grid_search(pool, default_gamma_grid(), default_cost_grid(), base);
    std::string csv = "gamma,cost,balanced_accuracy\n";
    for (const auto& cell : res.table)
        csv += format_g17(cell.gamma) + "," + format_g17(cell.cost) + "," +
               format_f(cell.score, 6) + "\n";
    write_file(m.out_dir + "/gridsearch.csv", csv);
    std::string sel;
    sel += "gamma = " + format_g17(res.best.gamma) + "\n";
    sel += "cost_neg = " + format_g17(res.best.cost_neg) + "\n";
    sel += "balanced_accuracy = " + format_f(res.best_score, 6) + "\n";
    write_file(m.out_dir + "/selected_params.txt", sel);
    log << "gridsearch: best gamma=" << res.best.gamma << " cost=" << res.best.cost_neg
        << " balanced_accuracy=" << res.best_score << "\n";
    return 0;
}

}  // namespace actlearn
