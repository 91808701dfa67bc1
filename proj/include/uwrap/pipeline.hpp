#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uwrap/aggregation.hpp"
#include "uwrap/ddm.hpp"
#include "uwrap/error.hpp"
#include "uwrap/evaluation.hpp"
#include "uwrap/impact_model.hpp"
#include "uwrap/synthgen.hpp"

namespace uwrap {

struct CellTypeRunConfig {
    std::vector<Variant> variants;
    // Label of the wrapper used for aggregation and plots, e.g. "basic+outcome".
    std::string aggregate_variant = "basic+outcome";
};

struct RunConfig {
    std::filesystem::path work_dir;
    std::uint64_t seed = 1;
    Panel panel;
    GeneratorConfig generator;
    SplitCounts samples{10, 10, 10};
    MlpHyperparams ddm;
    std::optional<std::uint64_t> ddm_seed;
    double confidence = 0.99;
    TreeParams tree;
    std::size_t min_leaf_calib_root = 200;
    std::size_t min_leaf_calib_subtype = 50;
    SubtypeBasis subtype_basis = SubtypeBasis::GroundTruth;
    FactorParams factors;
    std::map<std::string, CellTypeRunConfig> cell_types;
    QuadrantGates gates;
    std::size_t plot_max_events = 20000;

    std::filesystem::path data_dir() const { return work_dir / "data"; }
    std::filesystem::path model_dir() const { return work_dir / "models"; }
    std::filesystem::path wrapper_dir() const { return work_dir / "wrappers"; }
    std::filesystem::path report_dir() const { return work_dir / "reports"; }
    std::filesystem::path plot_dir() const { return work_dir / "plots"; }
};

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out;
};

// Relative paths (work_dir, panel file) resolve against the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path, const RunOverrides& overrides = {});
RunConfig run_config_from_json(const json& j, const std::filesystem::path& base_dir, const RunOverrides& overrides = {});

// Variant configurations built for one variant name: baseline gives one, every other
// variant gives default+outcome and category-based.
std::vector<VariantConfig> expand_variant(Variant v, const FactorParams& params);
std::string wrapper_file_name(const std::string& cell_type, const VariantConfig& v);

std::uint64_t ddm_seed_for(const RunConfig& cfg, std::size_t cell_type_index);

// Commands. Each writes its artifacts under cfg.work_dir and a short summary to `log`.
void cmd_generate(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_build(const RunConfig& cfg, std::ostream& log);
std::vector<ComparisonRow> cmd_evaluate(const RunConfig& cfg, std::ostream& log);
std::vector<PopulationBounds> cmd_aggregate(const RunConfig& cfg, std::ostream& log);
std::filesystem::path cmd_plot_gating(const RunConfig& cfg, const std::string& sample_id, const std::string& cell_type,
                                      std::optional<MarkerPair> pair, std::ostream& log);
std::filesystem::path cmd_dump_factors(const RunConfig& cfg, const std::string& sample_id,
                                       const std::string& cell_type, std::ostream& log);

// Shared loaders.
Dataset load_split_data(const RunConfig& cfg);
std::map<std::string, std::shared_ptr<const DdmModel>> load_ddms(const RunConfig& cfg);
std::vector<UncertaintyWrapper> load_wrappers(const std::filesystem::path& dir);
UncertaintyWrapper load_wrapper(const std::filesystem::path& path);

// Process exit code for an error kind: 1 usage/config, 2 I/O, 3 data/schema.
int exit_code_for(ErrorKind kind);

}  // namespace uwrap
