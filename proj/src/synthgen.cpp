#include "uwrap/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "uwrap/error.hpp"

namespace uwrap {

void GeneratorConfig::validate() const {
    if (components.empty()) throw config_error("generator needs at least one mixture component");
    double total = 0.0;
    const auto k = panel.marker_count();
    for (std::size_t c = 0; c < components.size(); ++c) {
        const auto& comp = components[c];
        auto where = "component " + std::to_string(c) + ": ";
        if (!(comp.weight > 0.0)) throw config_error(where + "weight must be positive");
        total += comp.weight;
        if (comp.mean.size() != k || comp.sd.size() != k)
            throw config_error(where + "mean/sd length must equal the marker count");
        for (double s : comp.sd)
            if (!(s > 0.0)) throw config_error(where + "standard deviations must be positive");
        for (const auto& [name, value] : comp.labels) {
            const auto* ct = panel.find_cell_type(name);
            if (!ct) throw config_error(where + "unknown cell type " + name);
            if (value && ct->parent) {
                auto it = comp.labels.find(*ct->parent);
                if (it == comp.labels.end() || !it->second)
                    throw config_error(where + name + " is positive but its parent " + *ct->parent + " is not");
            }
        }
    }
    if (std::abs(total - 1.0) > 1e-9) throw config_error("mixture weights must sum to 1");
    if (!(sample_shift_sd >= 0.0)) throw config_error("sample_shift_sd must be non-negative");
    if (events_per_sample == 0) throw config_error("events_per_sample must be positive");
}

GeneratorConfig generator_config_from_json(const json& j, const Panel& panel) {
    GeneratorConfig c;
    c.panel = panel;
    try {
        c.events_per_sample = j.value("events_per_sample", std::size_t{1000});
        c.sample_shift_sd = j.value("sample_shift_sd", 0.0);
        c.transform = transform_from_json(j.value("transform", json()));
        for (const auto& cj : j.at("components")) {
            MixtureComponent comp;
            comp.weight = cj.at("weight").get<double>();
            comp.mean = cj.at("mean").get<std::vector<double>>();
            comp.sd = cj.at("sd").get<std::vector<double>>();
            if (cj.contains("labels"))
                for (auto& [k, v] : cj["labels"].items()) comp.labels[k] = v.get<bool>();
            c.components.push_back(std::move(comp));
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("invalid generator config: ") + e.what());
    }
    c.validate();
    return c;
}

json generator_config_to_json(const GeneratorConfig& c) {
    json comps = json::array();
    for (const auto& comp : c.components)
        comps.push_back({{"labels", comp.labels}, {"weight", comp.weight}, {"mean", comp.mean}, {"sd", comp.sd}});
    return {{"events_per_sample", c.events_per_sample},
            {"sample_shift_sd", c.sample_shift_sd},
            {"transform", transform_to_json(c.transform)},
            {"components", comps}};
}

std::string sample_name(std::size_t sample_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "S%03zu", sample_index);
    return buf;
}

Sample generate_sample(const GeneratorConfig& config, std::uint64_t seed, std::size_t sample_index) {
    config.validate();
    const auto k = config.panel.marker_count();
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(sample_index), static_cast<std::uint32_t>(sample_index >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> stdnorm(0.0, 1.0);

    std::vector<double> shift(k, 0.0);
    if (config.sample_shift_sd > 0.0)
        for (auto& s : shift) s = config.sample_shift_sd * stdnorm(rng);

    std::vector<double> weights;
    for (const auto& c : config.components) weights.push_back(c.weight);
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());

    // Full label map per component (unlisted cell types negative).
    std::vector<std::map<std::string, bool>> label_maps;
    for (const auto& c : config.components) {
        std::map<std::string, bool> m;
        for (const auto& ct : config.panel.cell_types) {
            auto it = c.labels.find(ct.name);
            m[ct.name] = it != c.labels.end() && it->second;
        }
        label_maps.push_back(std::move(m));
    }

    Sample s;
    s.sample_id = sample_name(sample_index);
    s.events.reserve(config.events_per_sample);
    for (std::size_t i = 0; i < config.events_per_sample; ++i) {
        auto ci = pick(rng);
        const auto& comp = config.components[ci];
        Event e;
        e.sample_id = s.sample_id;
        e.event_id = "e" + std::to_string(i);
        e.markers.resize(k);
        for (std::size_t m = 0; m < k; ++m)
            e.markers[m] = config.transform.inverse(comp.mean[m] + shift[m] + comp.sd[m] * stdnorm(rng));
        e.labels = label_maps[ci];
        s.events.push_back(std::move(e));
    }
    return s;
}

Dataset generate_dataset(const GeneratorConfig& config, const SplitCounts& counts, std::uint64_t seed) {
    if (counts.train == 0 || counts.calibration == 0 || counts.test == 0)
        throw config_error("each split needs at least one sample");
    Dataset ds;
    ds.panel = config.panel;
    std::size_t index = 0;
    auto add = [&](std::size_t n, Split split) {
        for (std::size_t i = 0; i < n; ++i, ++index) {
            ds.samples.push_back(generate_sample(config, seed, index));
            ds.split[ds.samples.back().sample_id] = split;
        }
    };
    add(counts.train, Split::Train);
    add(counts.calibration, Split::Calibration);
    add(counts.test, Split::Test);
    return ds;
}

Quadrant parse_quadrant(std::string_view s) {
    if (s == "UL") return Quadrant::UL;
    if (s == "UR") return Quadrant::UR;
    if (s == "LL") return Quadrant::LL;
    if (s == "LR") return Quadrant::LR;
    throw config_error("unknown quadrant '" + std::string(s) + "'");
}

std::string_view to_string(Quadrant q) {
    switch (q) {
        case Quadrant::UL: return "UL";
        case Quadrant::UR: return "UR";
        case Quadrant::LL: return "LL";
        case Quadrant::LR: return "LR";
    }
    return "UR";
}

QuadrantGates quadrant_gates_from_json(const json& j, const Panel& panel) {
    QuadrantGates gates;
    if (j.is_null()) return gates;
    try {
        for (auto& [name, g] : j.items()) {
            panel.cell_type(name);
            QuadrantGate gate;
            auto pr = g.at("pair");
            gate.pair = {pr.at(0).get<std::size_t>(), pr.at(1).get<std::size_t>()};
            if (gate.pair.first >= panel.marker_count() || gate.pair.second >= panel.marker_count())
                throw config_error("gate for " + name + " references an unknown marker");
            gate.threshold_x = g.at("threshold_x").get<double>();
            gate.threshold_y = g.at("threshold_y").get<double>();
            if (!std::isfinite(gate.threshold_x) || !std::isfinite(gate.threshold_y))
                throw config_error("gate thresholds must be finite");
            gate.quadrant = parse_quadrant(g.at("quadrant").get<std::string>());
            gates[name] = gate;
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("invalid gates: ") + e.what());
    }
    return gates;
}

json quadrant_gates_to_json(const QuadrantGates& gates, const Panel&) {
    json j = json::object();
    for (const auto& [name, g] : gates)
        j[name] = {{"pair", {g.pair.first, g.pair.second}},
                   {"threshold_x", g.threshold_x},
                   {"threshold_y", g.threshold_y},
                   {"quadrant", to_string(g.quadrant)}};
    return j;
}

bool in_quadrant(double x, double y, const QuadrantGate& gate) {
    const bool right = x >= gate.threshold_x;
    const bool upper = y >= gate.threshold_y;
    switch (gate.quadrant) {
        case Quadrant::UL: return upper && !right;
        case Quadrant::UR: return upper && right;
        case Quadrant::LL: return !upper && !right;
        case Quadrant::LR: return !upper && right;
    }
    return false;
}

std::vector<std::map<std::string, bool>> quadrant_gate_labels(const Sample& sample, const Panel& panel,
                                                              const QuadrantGates& gates,
                                                              const MarkerTransform& transform) {
    auto order = panel.topological_order();
    std::vector<std::map<std::string, bool>> out(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const auto& e = sample.events[i];
        auto& labels = out[i];
        for (const auto* ct : order) {
            auto git = gates.find(ct->name);
            if (git == gates.end()) continue;
            const auto& g = git->second;
            if (g.pair.first >= e.markers.size() || g.pair.second >= e.markers.size())
                throw input_error("gate for " + ct->name + " references a missing marker");
            bool positive = in_quadrant(transform.apply(e.markers[g.pair.first]),
                                        transform.apply(e.markers[g.pair.second]), g);
            if (ct->parent) {
                auto pit = labels.find(*ct->parent);
                positive = positive && pit != labels.end() && pit->second;
            }
            labels[ct->name] = positive;
        }
    }
    return out;
}

}  // namespace uwrap
