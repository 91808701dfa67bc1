#include "uwrap/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <tuple>

#include "uwrap/io_util.hpp"
#include "uwrap/svg.hpp"

namespace uwrap {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() ? p : base / p; }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

CellTypeRunConfig cell_type_config_from_json(const json& j) {
    CellTypeRunConfig c;
    if (j.contains("variants"))
        for (const auto& v : j["variants"]) c.variants.push_back(parse_variant(v.get<std::string>()));
    else
        c.variants = {Variant::Baseline, Variant::Basic};
    c.aggregate_variant = j.value("aggregate_variant", c.aggregate_variant);
    return c;
}

void check_run_config(const RunConfig& cfg) {
    auto report = validate_panel(cfg.panel);
    if (!report.ok()) throw config_error("invalid panel: " + report.violations.front().message);
    if (cfg.samples.train == 0 || cfg.samples.calibration == 0 || cfg.samples.test == 0)
        throw config_error("every split needs at least one sample");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) throw config_error("confidence must lie in (0, 1)");
    for (const auto& [name, ct] : cfg.cell_types) {
        const auto* spec = cfg.panel.find_cell_type(name);
        if (!spec) throw config_error("cell_types names unknown cell type " + name);
        if (ct.variants.empty()) throw config_error("no variants configured for " + name);
        bool found = false;
        for (auto v : ct.variants) {
            if (v == Variant::Homogeneity && !homogeneity_enabled(cfg.factors, *spec))
                throw config_error("homogeneity variant requested for " + name + " but the factor is disabled there");
            for (const auto& vc : expand_variant(v, cfg.factors)) found = found || vc.label() == ct.aggregate_variant;
        }
        if (!found) throw config_error("aggregate_variant " + ct.aggregate_variant + " is not built for " + name);
        if (spec->parent && !cfg.cell_types.count(*spec->parent))
            throw config_error("subtype " + name + " needs its parent " + *spec->parent + " in cell_types");
    }
}

std::vector<const CellTypeSpec*> configured_types(const RunConfig& cfg) {
    std::vector<const CellTypeSpec*> out;
    for (const auto* spec : cfg.panel.topological_order())
        if (cfg.cell_types.count(spec->name)) out.push_back(spec);
    return out;
}

const Sample& find_sample(const Dataset& d, const std::string& id) {
    for (const auto& s : d.samples)
        if (s.sample_id == id) return s;
    throw config_error("unknown sample " + id);
}

fs::path aggregate_wrapper_path(const RunConfig& cfg, const std::string& ct) {
    const auto& c = cfg.cell_types.at(ct);
    for (auto v : c.variants)
        for (const auto& vc : expand_variant(v, cfg.factors))
            if (vc.label() == c.aggregate_variant) return cfg.wrapper_dir() / wrapper_file_name(ct, vc);
    throw config_error("aggregate_variant " + c.aggregate_variant + " is not built for " + ct);
}

// Population a cell type's wrapper is applied to inside one sample: every event for a root
// type, the parent-predicted subset for a subtype.
Sample wrapped_population(const RunConfig& cfg, const Sample& s, const CellTypeSpec& spec) {
    if (!spec.parent) return s;
    auto parent = load_wrapper(aggregate_wrapper_path(cfg, *spec.parent));
    return parent_population(s, spec, SubtypeBasis::ParentPrediction, parent.ddm.get());
}

}  // namespace

RunConfig run_config_from_json(const json& j, const fs::path& base_dir, const RunOverrides& overrides) {
    RunConfig cfg;
    try {
        if (!j.is_object()) throw config_error("config must be a JSON object");
        cfg.seed = j.value("seed", cfg.seed);
        cfg.work_dir = resolve(j.value("work_dir", std::string("run")), base_dir);

        const auto& pj = j.at("panel");
        cfg.panel = pj.is_string() ? load_panel(resolve(pj.get<std::string>(), base_dir)) : panel_from_json(pj);

        if (j.contains("factors")) {
            const auto& f = j["factors"];
            cfg.factors.transform = transform_from_json(f.value("transform", json()));
            cfg.factors.dbscan_eps = f.value("dbscan_eps", cfg.factors.dbscan_eps);
            cfg.factors.dbscan_min_pts = f.value("dbscan_min_pts", cfg.factors.dbscan_min_pts);
            cfg.factors.bandwidth = parse_bandwidth_rule(f.value("kde_bandwidth", std::string("scott")));
            if (f.contains("homogeneity") && !f["homogeneity"].is_null())
                cfg.factors.homogeneity = f["homogeneity"].get<bool>();
        }
        if (!(cfg.factors.dbscan_eps > 0.0)) throw config_error("dbscan_eps must be positive");
        if (cfg.factors.dbscan_min_pts == 0) throw config_error("dbscan_min_pts must be positive");

        cfg.generator = generator_config_from_json(j.at("generator"), cfg.panel);
        if (j.contains("samples")) {
            const auto& s = j["samples"];
            cfg.samples.train = s.value("train", cfg.samples.train);
            cfg.samples.calibration = s.value("calibration", cfg.samples.calibration);
            cfg.samples.test = s.value("test", cfg.samples.test);
        }
        if (j.contains("ddm")) {
            cfg.ddm = mlp_hyperparams_from_json(j["ddm"]);
            if (j["ddm"].contains("seed")) cfg.ddm_seed = j["ddm"]["seed"].get<std::uint64_t>();
        }
        cfg.confidence = j.value("confidence", cfg.confidence);
        if (j.contains("tree")) {
            cfg.tree.max_depth = j["tree"].value("max_depth", cfg.tree.max_depth);
            cfg.tree.min_samples_leaf = j["tree"].value("min_samples_leaf", cfg.tree.min_samples_leaf);
        }
        if (j.contains("min_leaf_calib")) {
            cfg.min_leaf_calib_root = j["min_leaf_calib"].value("root", cfg.min_leaf_calib_root);
            cfg.min_leaf_calib_subtype = j["min_leaf_calib"].value("subtype", cfg.min_leaf_calib_subtype);
        }
        if (j.contains("subtype_basis")) cfg.subtype_basis = parse_subtype_basis(j["subtype_basis"].get<std::string>());
        if (j.contains("cell_types")) {
            for (auto& [name, c] : j["cell_types"].items()) cfg.cell_types[name] = cell_type_config_from_json(c);
        } else {
            for (const auto& ct : cfg.panel.cell_types) cfg.cell_types[ct.name] = cell_type_config_from_json(json::object());
        }
        cfg.gates = quadrant_gates_from_json(j.value("gates", json()), cfg.panel);
        cfg.plot_max_events = j.value("plot_max_events", cfg.plot_max_events);
    } catch (const json::exception& e) {
        throw config_error(std::string("invalid config: ") + e.what());
    }
    if (overrides.seed) cfg.seed = *overrides.seed;
    if (overrides.out) cfg.work_dir = *overrides.out;
    check_run_config(cfg);
    return cfg;
}

RunConfig load_run_config(const fs::path& path, const RunOverrides& overrides) {
    json j;
    try {
        j = load_json_file(path);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Parse) throw config_error(e.what());
        throw;
    }
    return run_config_from_json(j, path.parent_path(), overrides);
}

std::vector<VariantConfig> expand_variant(Variant v, const FactorParams& params) {
    VariantConfig base;
    base.variant = v;
    base.params = params;
    if (v == Variant::Baseline) return {base};
    VariantConfig with_outcome = base, category = base;
    with_outcome.include_outcome = true;
    category.impact_kind = ImpactKind::CategoryBased;
    return {with_outcome, category};
}

std::string wrapper_file_name(const std::string& cell_type, const VariantConfig& v) {
    std::string name = cell_type + "__" + std::string(to_string(v.variant));
    if (v.include_outcome) name += "__outcome";
    if (v.impact_kind == ImpactKind::CategoryBased) name += "__category";
    return name + ".json";
}

std::uint64_t ddm_seed_for(const RunConfig& cfg, std::size_t cell_type_index) {
    return cfg.ddm_seed.value_or(cfg.seed) * 1000003ULL + cell_type_index;
}

void cmd_generate(const RunConfig& cfg, std::ostream& log) {
    auto data = generate_dataset(cfg.generator, cfg.samples, cfg.seed);
    json manifest = {{"seed", cfg.seed},
                     {"events_per_sample", cfg.generator.events_per_sample},
                     {"panel", panel_to_json(cfg.panel)},
                     {"generator", generator_config_to_json(cfg.generator)}};
    for (auto split : {Split::Train, Split::Calibration, Split::Test}) {
        Dataset part;
        part.panel = data.panel;
        for (const auto* s : data.samples_in(split)) {
            part.samples.push_back(*s);
            part.split[s->sample_id] = split;
        }
        const std::string name(to_string(split));
        write_events_csv(cfg.data_dir() / (name + ".csv"), part, {true, false, true});
        json ids = json::array();
        for (const auto& s : part.samples) ids.push_back(s.sample_id);
        manifest["splits"][name] = {{"samples", ids}, {"events", part.event_count()}};
        log << name << ": " << part.samples.size() << " samples, " << part.event_count() << " events\n";
    }
    save_json_file(cfg.data_dir() / "manifest.json", manifest);
}

Dataset load_split_data(const RunConfig& cfg) {
    Dataset all;
    all.panel = cfg.panel;
    for (auto split : {Split::Train, Split::Calibration, Split::Test}) {
        auto part = load_events_csv(cfg.data_dir() / (std::string(to_string(split)) + ".csv"), cfg.panel);
        for (auto& s : part.samples) {
            if (all.split.count(s.sample_id)) throw schema_error("sample " + s.sample_id + " appears in two splits");
            all.split[s.sample_id] = split;
            all.samples.push_back(std::move(s));
        }
    }
    auto report = validate_panel(cfg.panel, all);
    if (!report.ok()) throw schema_error(report.violations.front().message);
    return all;
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
    auto data = load_split_data(cfg);
    json metrics = json::object();
    const auto order = cfg.panel.topological_order();
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& spec = *order[i];
        std::vector<Event> train;
        for (const auto* s : data.samples_in(Split::Train)) {
            auto pop = parent_population(*s, spec, SubtypeBasis::GroundTruth, nullptr);
            for (auto& e : pop.events) train.push_back(std::move(e));
        }
        auto hp = cfg.ddm;
        hp.seed = ddm_seed_for(cfg, i);
        auto model = train_ddm(train, spec.name, hp, cfg.factors.transform);

        std::size_t n = 0, correct = 0;
        for (const auto* s : data.samples_in(Split::Calibration)) {
            auto pop = parent_population(*s, spec, SubtypeBasis::GroundTruth, nullptr);
            auto pred = predict_sample(model, pop);
            auto err = prediction_errors(pop, pred, spec.name);
            n += err.size();
            correct += static_cast<std::size_t>(std::count(err.begin(), err.end(), false));
        }
        save_ddm(cfg.model_dir() / ("ddm_" + spec.name + ".json"), model);
        const double acc = n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
        metrics[spec.name] = {{"train_events", train.size()},
                              {"calibration_events", n},
                              {"calibration_accuracy", acc},
                              {"seed", hp.seed}};
        log << spec.name << ": trained on " << train.size() << " events, calibration accuracy " << fixed(acc, 4)
            << "\n";
    }
    save_json_file(cfg.model_dir() / "metrics.json", metrics);
}

std::map<std::string, std::shared_ptr<const DdmModel>> load_ddms(const RunConfig& cfg) {
    std::map<std::string, std::shared_ptr<const DdmModel>> out;
    for (const auto& ct : cfg.panel.cell_types) {
        auto m = load_ddm(cfg.model_dir() / ("ddm_" + ct.name + ".json"));
        if (m.cell_type() != ct.name) throw schema_error("model file for " + ct.name + " predicts " + m.cell_type());
        out[ct.name] = std::make_shared<const DdmModel>(std::move(m));
    }
    return out;
}

void cmd_build(const RunConfig& cfg, std::ostream& log) {
    auto data = load_split_data(cfg);
    auto ddms = load_ddms(cfg);
    const auto train = data.samples_in(Split::Train);
    const auto calib = data.samples_in(Split::Calibration);

    if (fs::exists(cfg.wrapper_dir()))
        for (const auto& entry : fs::directory_iterator(cfg.wrapper_dir())) {
            const auto name = entry.path().filename().string();
            if (entry.is_regular_file() && entry.path().extension() == ".json" && name.find("__") != std::string::npos)
                fs::remove(entry.path());
        }

    for (const auto* spec : configured_types(cfg)) {
        BuildOptions opt;
        opt.tree = cfg.tree;
        opt.confidence = cfg.confidence;
        opt.min_leaf_calib = spec->parent ? cfg.min_leaf_calib_subtype : cfg.min_leaf_calib_root;
        opt.subtype_basis = cfg.subtype_basis;
        const Predictor* parent = spec->parent ? ddms.at(*spec->parent).get() : nullptr;
        for (auto v : cfg.cell_types.at(spec->name).variants) {
            for (const auto& vc : expand_variant(v, cfg.factors)) {
                auto w = build_wrapper(vc, ddms.at(spec->name), train, calib, cfg.panel, spec->name, opt, parent);
                w.ddm_ref = "../models/ddm_" + spec->name + ".json";
                save_json_file(cfg.wrapper_dir() / wrapper_file_name(spec->name, vc), wrapper_to_json(w));
                log << spec->name << " " << vc.label() << ": leaves";
                for (const auto& [before, after] : w.leaf_counts) log << " " << before << "->" << after;
                log << "\n";
            }
        }
    }
}

UncertaintyWrapper load_wrapper(const fs::path& path) {
    auto w = wrapper_from_json(load_json_file(path));
    if (!w.ddm_ref.empty()) {
        auto ddm = load_ddm(resolve(w.ddm_ref, path.parent_path()));
        if (ddm.cell_type() != w.cell_type)
            throw schema_error(path.string() + ": referenced model predicts " + ddm.cell_type());
        w.ddm = std::make_shared<const DdmModel>(std::move(ddm));
    }
    return w;
}

std::vector<UncertaintyWrapper> load_wrappers(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw io_error("wrapper directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<UncertaintyWrapper> out;
    for (const auto& f : files) out.push_back(load_wrapper(f));
    if (out.empty()) throw io_error("no wrapper files in " + dir.string());
    return out;
}

std::vector<ComparisonRow> cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
    auto data = load_split_data(cfg);
    auto wrappers = load_wrappers(cfg.wrapper_dir());
    const auto test = data.samples_in(Split::Test);

    auto rank = [](const UncertaintyWrapper& w) {
        return std::tuple(static_cast<int>(w.variant.variant), w.variant.impact_kind == ImpactKind::CategoryBased,
                          !w.variant.include_outcome);
    };
    std::vector<ComparisonRow> rows;
    for (const auto* spec : cfg.panel.topological_order()) {
        std::vector<const UncertaintyWrapper*> group;
        for (const auto& w : wrappers)
            if (w.cell_type == spec->name) group.push_back(&w);
        if (group.empty()) continue;
        std::stable_sort(group.begin(), group.end(), [&](auto* a, auto* b) { return rank(*a) < rank(*b); });
        for (auto& r : compare_variants(group, test)) rows.push_back(std::move(r));
    }
    write_file_atomic(cfg.report_dir() / "table.csv", format_comparison_csv(rows));
    const auto text = format_comparison_text(rows);
    write_file_atomic(cfg.report_dir() / "table.txt", text);
    log << text;
    return rows;
}

std::vector<PopulationBounds> cmd_aggregate(const RunConfig& cfg, std::ostream& log) {
    auto data = load_split_data(cfg);
    std::vector<UncertaintyWrapper> owned;
    std::vector<std::string> names;
    for (const auto* spec : configured_types(cfg)) {
        owned.push_back(load_wrapper(aggregate_wrapper_path(cfg, spec->name)));
        names.push_back(spec->name);
    }
    std::map<std::string, const UncertaintyWrapper*> wrappers;
    for (std::size_t i = 0; i < owned.size(); ++i) wrappers[names[i]] = &owned[i];

    auto bounds = dataset_bounds(wrappers, data.samples_in(Split::Test), cfg.panel);
    write_file_atomic(cfg.report_dir() / "bounds.csv", format_bounds_csv(bounds));
    auto coverage = summarize_coverage(bounds);
    for (const auto& name : names) {
        std::vector<PopulationBounds> mine;
        for (const auto& b : bounds)
            if (b.cell_type == name) mine.push_back(b);
        write_file_atomic(cfg.plot_dir() / ("bounds_" + name + ".svg"), bounds_chart_svg(name, mine));
        const auto& c = coverage[name];
        log << name << ": " << c.inside << "/" << c.with_truth << " samples inside bounds\n";
    }
    const auto& total = coverage[""];
    log << "coverage " << fixed(total.rate(), 4) << "\n";
    return bounds;
}

fs::path cmd_plot_gating(const RunConfig& cfg, const std::string& sample_id, const std::string& cell_type,
                         std::optional<MarkerPair> pair, std::ostream& log) {
    const auto* found = cfg.panel.find_cell_type(cell_type);
    if (!found) throw config_error("unknown cell type " + cell_type);
    const auto& spec = *found;
    if (!cfg.cell_types.count(cell_type)) throw config_error("no wrapper configured for " + cell_type);
    if (!pair) {
        if (spec.gating_pairs.empty()) throw config_error(cell_type + " has no gating pairs; pass --pair");
        pair = spec.gating_pairs.front();
    }
    if (pair->first >= cfg.panel.marker_count() || pair->second >= cfg.panel.marker_count())
        throw config_error("marker pair out of range");

    auto data = load_split_data(cfg);
    const auto& sample = find_sample(data, sample_id);
    auto w = load_wrapper(aggregate_wrapper_path(cfg, cell_type));
    auto pop = wrapped_population(cfg, sample, spec);
    auto est = wrapper_apply(w, pop);

    GatingPlotInput in;
    in.title = sample_id + " " + cell_type + " (" + w.variant.label() + ")";
    in.x_label = cfg.panel.marker_names[pair->first];
    in.y_label = cfg.panel.marker_names[pair->second];
    in.positive_label = cell_type + " predicted";
    in.negative_label = "not " + cell_type;
    in.max_points = cfg.plot_max_events;
    const auto& t = cfg.factors.transform;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        in.xs.push_back(t.apply(pop.events[i].markers[pair->first]));
        in.ys.push_back(t.apply(pop.events[i].markers[pair->second]));
        in.uncertainties.push_back(est[i].uncertainty);
        in.predictions.push_back(est[i].prediction);
    }
    if (auto g = cfg.gates.find(cell_type); g != cfg.gates.end() && g->second.pair == *pair)
        in.gate = GateLines{g->second.threshold_x, g->second.threshold_y};

    const auto out = cfg.plot_dir() / ("gating_" + sample_id + "_" + cell_type + "_" + std::to_string(pair->first) +
                                       "_" + std::to_string(pair->second) + ".svg");
    write_file_atomic(out, gating_plot_svg(in));
    log << "wrote " << out.string() << " (" << pop.size() << " events)\n";
    return out;
}

fs::path cmd_dump_factors(const RunConfig& cfg, const std::string& sample_id, const std::string& cell_type,
                          std::ostream& log) {
    const auto* found = cfg.panel.find_cell_type(cell_type);
    if (!found) throw config_error("unknown cell type " + cell_type);
    const auto& spec = *found;
    if (!cfg.cell_types.count(cell_type)) throw config_error("no wrapper configured for " + cell_type);
    auto data = load_split_data(cfg);
    const auto& sample = find_sample(data, sample_id);
    auto w = load_wrapper(aggregate_wrapper_path(cfg, cell_type));
    auto pop = wrapped_population(cfg, sample, spec);
    auto preds = predict_sample(*w.ddm, pop);
    auto f = assemble_inspection_factors(cfg.factors, pop, preds, cfg.panel, spec);

    std::string csv = "event_id";
    for (const auto& n : f.names) csv += "," + n;
    csv += "\n";
    for (std::size_t i = 0; i < f.rows(); ++i) {
        csv += pop.events[i].event_id;
        for (double v : f.row(i)) csv += "," + format_double(v);
        csv += "\n";
    }
    const auto out = cfg.report_dir() / ("factors_" + sample_id + "_" + cell_type + ".csv");
    write_file_atomic(out, csv);
    log << "wrote " << out.string() << " (" << f.rows() << " events, " << f.cols() << " factors)\n";

    if (spec.gating_pairs.empty()) return out;
    const auto [px, py] = spec.gating_pairs.front();
    const auto& t = cfg.factors.transform;
    for (std::size_t c = 0; c < f.cols(); ++c) {
        const auto& name = f.names[c];
        if (name.rfind("marker_", 0) == 0 || name == "outcome") continue;
        FactorPlotInput in;
        in.title = sample_id + " " + cell_type + " " + name;
        in.x_label = cfg.panel.marker_names[px];
        in.y_label = cfg.panel.marker_names[py];
        in.factor_name = name;
        in.max_points = cfg.plot_max_events;
        for (std::size_t i = 0; i < f.rows(); ++i) {
            in.xs.push_back(t.apply(pop.events[i].markers[px]));
            in.ys.push_back(t.apply(pop.events[i].markers[py]));
            in.values.push_back(f.row(i)[c]);
        }
        const auto svg = cfg.plot_dir() / ("factors_" + sample_id + "_" + cell_type + "_" + name + ".svg");
        write_file_atomic(svg, factor_plot_svg(in));
    }
    return out;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config:
            return 1;
        case ErrorKind::Io:
            return 2;
        default:
            return 3;
    }
}

}  // namespace uwrap
