#include "advhar/commands.hpp"
#include "advhar/error.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kDataError = 3, kDiverged = 4 };

struct CommonOptions {
    std::string config_file;
    std::string preset;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<std::size_t> epochs;
};

void add_common(CLI::App *cmd, CommonOptions &o) {
    cmd->add_option("-c,--config", o.config_file, "JSON run configuration");
    cmd->add_option("--preset", o.preset, "start from a built-in configuration")->check(CLI::IsMember({"benchmark"}));
    cmd->add_option("-s,--set", o.overrides, "override a config value, e.g. adversarial_trainer.epochs=20");
    cmd->add_option("--seed", o.seed, "run seed (cli.seed)");
    cmd->add_option("-o,--out", o.output_dir, "output directory (cli.output_dir)");
    cmd->add_option("--epochs", o.epochs, "epoch budget (adversarial_trainer.epochs)");
}

advhar::RunConfig resolve(const CommonOptions &o) {
    std::vector<std::string> overrides = o.overrides;
    if (o.seed) overrides.push_back("cli.seed=" + std::to_string(*o.seed));
    if (o.output_dir) overrides.push_back("cli.output_dir=" + advhar::Json(*o.output_dir).dump());
    if (o.epochs) overrides.push_back("adversarial_trainer.epochs=" + std::to_string(*o.epochs));
    return advhar::resolve_config(o.config_file, overrides, o.preset == "benchmark");
}

void print_report(const std::string &name, const advhar::ClassificationReport &r, int digits) {
    std::cout << "== " << name << "\n" << advhar::render_report(r, digits);
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Adversarial subject-to-subject adaptation for sensor-based activity recognition"};
    app.require_subcommand(1);
    CommonOptions common;

    auto *prepare = app.add_subcommand("prepare", "preprocess the configured subjects into train/val/test datasets");
    auto *train = app.add_subcommand("train", "adapt a classifier from the source to the unlabeled target");
    auto *baselines = app.add_subcommand("baselines", "train the No-Transfer and Supervised baselines");
    bool skip_supervised = false;
    baselines->add_flag("--no-supervised", skip_supervised, "only the No-Transfer baseline");
    auto *evaluate = app.add_subcommand("evaluate", "report a classifier checkpoint on the target test split");
    std::string checkpoint;
    std::string run_name = "evaluated";
    evaluate->add_option("--checkpoint", checkpoint, "classifier or bundle checkpoint")->required();
    evaluate->add_option("--name", run_name, "run directory for the report (adapted, no_transfer, supervised, ...)");
    auto *synth = app.add_subcommand("synth", "write the configured synthetic corpus as a recordings CSV");
    std::string csv_path;
    synth->add_option("--csv", csv_path, "output CSV path")->required();
    auto *report = app.add_subcommand("report", "compare every evaluated run in the output directory");
    auto *show = app.add_subcommand("config", "print the resolved configuration");
    for (auto *cmd : {prepare, train, baselines, evaluate, synth, report, show}) {
        add_common(cmd, common);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        const advhar::RunConfig cfg = resolve(common);
        if (*show) {
            std::cout << advhar::to_json(cfg).dump(2) << "\n";
        } else if (*prepare) {
            advhar::cmd_prepare(cfg);
            std::cout << "prepared datasets written to " << (cfg.output_dir / "prepared").string() << "\n";
        } else if (*train) {
            const auto r = advhar::cmd_train(cfg);
            if (r.report) print_report(r.name, *r.report, cfg.report_digits);
            std::cout << "artifacts in " << r.directory.string() << "\n";
        } else if (*baselines) {
            for (const auto &r : advhar::cmd_baselines(cfg, !skip_supervised)) {
                print_report(r.name, *r.report, cfg.report_digits);
            }
        } else if (*evaluate) {
            const auto r = advhar::cmd_evaluate(cfg, checkpoint, run_name);
            print_report(r.name, *r.report, cfg.report_digits);
        } else if (*synth) {
            const std::size_t frames = advhar::cmd_synth(cfg, csv_path);
            std::cout << "wrote " << frames << " frames to " << csv_path << "\n";
        } else if (*report) {
            std::cout << advhar::cmd_report(cfg);
        }
        return kOk;
    } catch (const advhar::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const advhar::DivergenceError &e) {
        std::cerr << "training diverged (" << e.component() << "): " << e.what() << "\n";
        return kDiverged;
    } catch (const advhar::Error &e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
