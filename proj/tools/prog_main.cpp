#include <string>
#include <vector>

#include "CLI11.hpp"

#include "prog/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"prognostics workbench: joint RUL estimation and failure prediction"};
    app.require_subcommand(1);

    std::string config;
    std::string checkpoint_dir;
    std::string windows_path;
    std::string output_path;
    std::vector<std::string> overrides;

    const auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("-c,--config", config, "JSON config file (// comments ok)");
        if (config_required) {
            opt->required();
        }
        sub->add_option("--set", overrides,
                        "override a config key, e.g. --set model.train.seed=7 (repeatable)");
    };

    CLI::App* prepare = app.add_subcommand(
        "prepare", "ingest a raw dataset, normalize, window and label it");
    add_common(prepare, true);

    CLI::App* synth = app.add_subcommand(
        "synth", "generate a synthetic Weibull degradation dataset");
    add_common(synth, true);

    CLI::App* train = app.add_subcommand("train", "train a model on prepared windows");
    add_common(train, true);

    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "score a trained checkpoint on a window file");
    add_common(evaluate, true);
    evaluate->add_option("--checkpoint", checkpoint_dir,
                         "training run directory (holds manifest.json)");

    CLI::App* predict = app.add_subcommand(
        "predict", "emit per-window predictions for a window file");
    add_common(predict, true);
    predict->add_option("--checkpoint", checkpoint_dir,
                        "training run directory (holds manifest.json)")->required();
    predict->add_option("--windows", windows_path, "window file to predict on")->required();
    predict->add_option("--output", output_path, "destination CSV")->required();

    CLI::App* gradcheck = app.add_subcommand(
        "gradcheck", "finite-difference check of every layer and loss");
    add_common(gradcheck, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return 2;  // usage problems are configuration problems
    }

    using namespace prog::commands;
    if (prepare->parsed()) {
        return cmd_prepare(config, overrides);
    }
    if (synth->parsed()) {
        return cmd_synth(config, overrides);
    }
    if (train->parsed()) {
        return cmd_train(config, overrides);
    }
    if (evaluate->parsed()) {
        return cmd_evaluate(config, overrides, checkpoint_dir);
    }
    if (predict->parsed()) {
        return cmd_predict(config, overrides, checkpoint_dir, windows_path, output_path);
    }
    if (gradcheck->parsed()) {
        return cmd_gradcheck(config, overrides);
    }
    return 2;
}
