#include <CLI11.hpp>

#include <charconv>
#include <iostream>
#include <optional>
#include <string>

#include "uwrap/pipeline.hpp"

namespace {

std::optional<uwrap::MarkerPair> parse_pair(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) return std::nullopt;
    auto num = [](std::string_view s) -> std::optional<std::size_t> {
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || s.empty()) return std::nullopt;
        return v;
    };
    auto a = num(std::string_view(text).substr(0, comma));
    auto b = num(std::string_view(text).substr(comma + 1));
    if (!a || !b) return std::nullopt;
    return uwrap::MarkerPair{*a, *b};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uncertainty wrappers for automated flow-cytometry gating"};
    app.require_subcommand(1);

    std::string config_path, sample, cell_type, pair_text, out_dir;
    std::optional<std::uint64_t> seed;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--seed", seed, "override the configured seed");
        sub->add_option("--out", out_dir, "override the configured work directory");
    };

    const char* commands[][2] = {
        {"generate", "generate synthetic train/calibration/test samples"},
        {"train", "train the built-in per-cell-type classifiers"},
        {"build", "build and calibrate uncertainty wrappers"},
        {"evaluate", "compare wrapper variants on the test split"},
        {"aggregate", "population-ratio bounds for the test samples"},
        {"plot-gating", "gating plot shaded by uncertainty"},
        {"dump-factors", "per-event quality factors for one sample"},
    };
    std::map<std::string, CLI::App*> subs;
    for (auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub);
        subs[name] = sub;
    }
    for (const char* name : {"plot-gating", "dump-factors"}) {
        subs[name]->add_option("--sample", sample, "sample id")->required();
        subs[name]->add_option("--cell-type", cell_type, "cell type name")->required();
    }
    subs["plot-gating"]->add_option("--pair", pair_text, "marker indices i,j");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "uwrap: " << e.what() << "\n";
        return 1;
    }

    try {
        uwrap::RunOverrides ov;
        ov.seed = seed;
        if (!out_dir.empty()) ov.out = out_dir;
        const auto cfg = uwrap::load_run_config(config_path, ov);

        auto& log = std::cout;
        if (subs["generate"]->parsed()) uwrap::cmd_generate(cfg, log);
        else if (subs["train"]->parsed()) uwrap::cmd_train(cfg, log);
        else if (subs["build"]->parsed()) uwrap::cmd_build(cfg, log);
        else if (subs["evaluate"]->parsed()) uwrap::cmd_evaluate(cfg, log);
        else if (subs["aggregate"]->parsed()) uwrap::cmd_aggregate(cfg, log);
        else if (subs["plot-gating"]->parsed()) {
            std::optional<uwrap::MarkerPair> pair;
            if (!pair_text.empty()) {
                pair = parse_pair(pair_text);
                if (!pair) {
                    std::cerr << "uwrap: --pair expects two marker indices, e.g. 3,4\n";
                    return 1;
                }
            }
            uwrap::cmd_plot_gating(cfg, sample, cell_type, pair, log);
        } else if (subs["dump-factors"]->parsed()) {
            uwrap::cmd_dump_factors(cfg, sample, cell_type, log);
        }
    } catch (const uwrap::Error& e) {
        std::cerr << "uwrap: " << e.what() << "\n";
        return uwrap::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "uwrap: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
