#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "actlearn/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"actlearn: autonomous visual learning of manipulation locations"};
    app.require_subcommand(1);

    actlearn::RunManifest m;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", m.scenario_path, "scenario config file")->required();
        sub->add_option("--seed", m.seed, "master random seed");
        sub->add_option("--out", m.out_dir, "output directory")->required();
    };

    CLI::App* train = app.add_subcommand("train", "learn both behaviors to convergence");
    add_common(train);

    CLI::App* evaluate = app.add_subcommand("evaluate", "measure execution success of a checkpoint");
    add_common(evaluate);
    evaluate->add_option("--checkpoint", m.checkpoint_path, "trained session checkpoint")->required();
    evaluate->add_option("--trials", m.trials, "trials per behavior");
    evaluate->add_option("--max-attempts", m.max_attempts, "retry budget per trial (0 = scenario default)");

    CLI::App* heatmap = app.add_subcommand("heatmap", "render classifier predictions over the scene");
    add_common(heatmap);
    heatmap->add_option("--checkpoint", m.checkpoint_path, "trained session checkpoint")->required();
    heatmap->add_option("--behavior", m.behavior, "behavior tag (default: both)");

    CLI::App* gridsearch = app.add_subcommand("gridsearch", "select SVM parameters on a registered multi-view pool");
    add_common(gridsearch);
    gridsearch->add_option("--views", m.views, "number of registered views");
    gridsearch->add_option("--candidates", m.grid_candidates, "candidates per view");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            m.command = "train";
            return actlearn::cmd_train(m);
        }
        if (evaluate->parsed()) {
            m.command = "evaluate";
            return actlearn::cmd_evaluate(m);
        }
        if (heatmap->parsed()) {
            m.command = "heatmap";
            return actlearn::cmd_heatmap(m);
        }
        if (gridsearch->parsed()) {
            m.command = "gridsearch";
            return actlearn::cmd_gridsearch(m);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
