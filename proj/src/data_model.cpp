#include "uwrap/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "uwrap/error.hpp"

namespace uwrap {

std::optional<std::size_t> Panel::marker_index(std::string_view name) const {
    for (std::size_t i = 0; i < marker_names.size(); ++i)
        if (marker_names[i] == name) return i;
    return std::nullopt;
}

const CellTypeSpec* Panel::find_cell_type(std::string_view name) const {
    for (const auto& ct : cell_types)
        if (ct.name == name) return &ct;
    return nullptr;
}

const CellTypeSpec& Panel::cell_type(std::string_view name) const {
    const auto* ct = find_cell_type(name);
    if (!ct) throw lookup_error("unknown cell type '" + std::string(name) + "'");
    return *ct;
}

std::vector<const CellTypeSpec*> Panel::topological_order() const {
    std::vector<const CellTypeSpec*> order;
    std::set<std::string> placed;
    // Repeated passes; panels are tiny.
    bool progress = true;
    while (order.size() < cell_types.size() && progress) {
        progress = false;
        for (const auto& ct : cell_types) {
            if (placed.count(ct.name)) continue;
            if (!ct.parent || placed.count(*ct.parent) || !find_cell_type(*ct.parent)) {
                order.push_back(&ct);
                placed.insert(ct.name);
                progress = true;
            }
        }
    }
    if (order.size() < cell_types.size()) throw config_error("cell type hierarchy contains a cycle");
    return order;
}

std::vector<std::size_t> gated_markers(const CellTypeSpec& spec) {
    std::set<std::size_t> s;
    for (const auto& [a, b] : spec.gating_pairs) {
        s.insert(a);
        s.insert(b);
    }
    return {s.begin(), s.end()};
}

std::optional<bool> Event::label(const std::string& cell_type) const {
    auto it = labels.find(cell_type);
    if (it == labels.end()) return std::nullopt;
    return it->second;
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Calibration: return "calibration";
        case Split::Test: return "test";
    }
    return "train";
}

std::optional<Split> parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "calibration") return Split::Calibration;
    if (s == "test") return Split::Test;
    return std::nullopt;
}

std::vector<const Sample*> Dataset::samples_in(Split s) const {
    std::vector<const Sample*> out;
    for (const auto& sample : samples) {
        auto it = split.find(sample.sample_id);
        if (it != split.end() && it->second == s) out.push_back(&sample);
    }
    return out;
}

std::size_t Dataset::event_count() const {
    std::size_t n = 0;
    for (const auto& s : samples) n += s.size();
    return n;
}

// ---- panel JSON ------------------------------------------------------------

Panel panel_from_json(const json& j) {
    Panel p;
    try {
        for (const auto& m : j.at("markers")) p.marker_names.push_back(m.get<std::string>());
        for (const auto& c : j.at("cell_types")) {
            CellTypeSpec ct;
            ct.name = c.at("name").get<std::string>();
            if (c.contains("parent") && !c["parent"].is_null()) ct.parent = c["parent"].get<std::string>();
            if (c.contains("gating_pairs")) {
                for (const auto& pr : c["gating_pairs"]) {
                    if (!pr.is_array() || pr.size() != 2) throw config_error("gating pair must be [i, j]");
                    ct.gating_pairs.emplace_back(pr[0].get<std::size_t>(), pr[1].get<std::size_t>());
                }
            }
            p.cell_types.push_back(std::move(ct));
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("invalid panel JSON: ") + e.what());
    }
    return p;
}

json panel_to_json(const Panel& panel) {
    json cts = json::array();
    for (const auto& ct : panel.cell_types) {
        json pairs = json::array();
        for (const auto& [a, b] : ct.gating_pairs) pairs.push_back({a, b});
        cts.push_back({{"name", ct.name},
                       {"parent", ct.parent ? json(*ct.parent) : json(nullptr)},
                       {"gating_pairs", pairs}});
    }
    return {{"markers", panel.marker_names}, {"cell_types", cts}};
}

Panel load_panel(const std::filesystem::path& path) { return panel_from_json(load_json_file(path)); }

// ---- events CSV ------------------------------------------------------------

namespace {

struct CsvLayout {
    std::vector<std::string> label_types;  // column order
    std::vector<std::string> pred_types;
    bool has_split = false;
};

CsvLayout parse_header(std::string_view header, const Panel& panel, std::string_view source) {
    auto cols = split_fields(header);
    const auto k = panel.marker_count();
    auto fail = [&](const std::string& what) {
        return schema_error(std::string(source) + ": line 1: " + what);
    };
    if (cols.size() < 2 + k || cols[0] != "sample_id" || cols[1] != "event_id")
        throw fail("header must start with sample_id,event_id followed by the marker columns");
    for (std::size_t i = 0; i < k; ++i)
        if (cols[2 + i] != "m_" + panel.marker_names[i])
            throw fail("expected marker column m_" + panel.marker_names[i] + ", got " + std::string(cols[2 + i]));
    CsvLayout layout;
    std::size_t i = 2 + k;
    for (; i < cols.size() && cols[i].starts_with("label_"); ++i) {
        std::string ct(cols[i].substr(6));
        if (!panel.find_cell_type(ct)) throw fail("unknown cell-type label column " + std::string(cols[i]));
        layout.label_types.push_back(ct);
    }
    for (; i < cols.size() && cols[i].starts_with("pred_"); ++i) {
        std::string ct(cols[i].substr(5));
        if (!panel.find_cell_type(ct)) throw fail("unknown cell-type prediction column " + std::string(cols[i]));
        layout.pred_types.push_back(ct);
    }
    if (i < cols.size() && cols[i] == "split") {
        layout.has_split = true;
        ++i;
    }
    if (i != cols.size()) throw fail("unexpected column " + std::string(cols[i]));
    return layout;
}

bool parse_flag(std::string_view s, std::size_t line, std::string_view source) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    if (s == "1") return true;
    if (s == "0") return false;
    throw parse_error(std::string(source) + ": line " + std::to_string(line) + ": expected 0/1, got '" +
                      std::string(s) + "'");
}

}  // namespace

Dataset parse_events_csv(std::string_view text, const Panel& panel, std::string_view source) {
    Dataset ds;
    ds.panel = panel;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    std::optional<CsvLayout> layout;
    std::unordered_map<std::string, std::size_t> sample_pos;
    const auto k = panel.marker_count();

    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!layout) {
            layout = parse_header(line, panel, source);
            continue;
        }
        if (line.empty()) continue;
        auto f = split_fields(line);
        const auto expected = 2 + k + layout->label_types.size() + layout->pred_types.size() + (layout->has_split ? 1 : 0);
        auto where = std::string(source) + ": line " + std::to_string(line_no) + ": ";
        if (f.size() != expected)
            throw parse_error(where + "expected " + std::to_string(expected) + " columns, got " + std::to_string(f.size()));

        Event e;
        e.sample_id = std::string(f[0]);
        e.event_id = std::string(f[1]);
        e.markers.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            auto v = parse_double(f[2 + i]);
            if (!v || !std::isfinite(*v))
                throw parse_error(where + "non-numeric marker value '" + std::string(f[2 + i]) + "'");
            e.markers.push_back(*v);
        }
        std::size_t c = 2 + k;
        for (const auto& ct : layout->label_types) e.labels[ct] = parse_flag(f[c++], line_no, source);
        for (const auto& ct : layout->pred_types) e.predictions[ct] = parse_flag(f[c++], line_no, source);

        auto [it, inserted] = sample_pos.try_emplace(e.sample_id, ds.samples.size());
        if (inserted) ds.samples.push_back(Sample{e.sample_id, {}});
        if (layout->has_split) {
            auto sp = parse_split(f[c]);
            if (!sp) throw parse_error(where + "invalid split '" + std::string(f[c]) + "'");
            auto [sit, fresh] = ds.split.try_emplace(e.sample_id, *sp);
            if (!fresh && sit->second != *sp)
                throw schema_error(where + "sample " + e.sample_id + " assigned to more than one split");
        }
        ds.samples[it->second].events.push_back(std::move(e));
    }
    if (!layout) throw schema_error(std::string(source) + ": missing header");
    return ds;
}

Dataset load_events_csv(const std::filesystem::path& path, const Panel& panel) {
    if (!std::filesystem::exists(path)) throw io_error("no such file: " + path.string());
    return parse_events_csv(read_text_file(path), panel, path.string());
}

std::string format_events_csv(const Dataset& dataset, const CsvWriteOptions& opts) {
    // Label/prediction columns: every cell type that appears on any event, panel order.
    std::vector<std::string> label_types, pred_types;
    for (const auto& ct : dataset.panel.cell_types) {
        bool has_label = false, has_pred = false;
        for (const auto& s : dataset.samples)
            for (const auto& e : s.events) {
                has_label = has_label || e.labels.count(ct.name);
                has_pred = has_pred || e.predictions.count(ct.name);
            }
        if (has_label && opts.include_labels) label_types.push_back(ct.name);
        if (has_pred && opts.include_predictions) pred_types.push_back(ct.name);
    }
    const bool with_split = opts.include_split && !dataset.split.empty();

    std::string out = "sample_id,event_id";
    for (const auto& m : dataset.panel.marker_names) out += ",m_" + m;
    for (const auto& ct : label_types) out += ",label_" + ct;
    for (const auto& ct : pred_types) out += ",pred_" + ct;
    if (with_split) out += ",split";
    out += '\n';

    for (const auto& s : dataset.samples) {
        std::string split_text;
        if (with_split) {
            auto it = dataset.split.find(s.sample_id);
            if (it == dataset.split.end()) throw input_error("sample " + s.sample_id + " has no split");
            split_text = std::string(to_string(it->second));
        }
        for (const auto& e : s.events) {
            out += e.sample_id;
            out += ',';
            out += e.event_id;
            for (double v : e.markers) {
                out += ',';
                out += format_double(v);
            }
            for (const auto& ct : label_types) {
                auto it = e.labels.find(ct);
                if (it == e.labels.end()) throw input_error("event " + e.event_id + " lacks label " + ct);
                out += it->second ? ",1" : ",0";
            }
            for (const auto& ct : pred_types) {
                auto it = e.predictions.find(ct);
                if (it == e.predictions.end()) throw input_error("event " + e.event_id + " lacks prediction " + ct);
                out += it->second ? ",1" : ",0";
            }
            if (with_split) {
                out += ',';
                out += split_text;
            }
            out += '\n';
        }
    }
    return out;
}

void write_events_csv(const std::filesystem::path& path, const Dataset& dataset, const CsvWriteOptions& opts) {
    write_file_atomic(path, format_events_csv(dataset, opts));
}

// ---- splitting -------------------------------------------------------------

std::vector<std::size_t> largest_remainder_counts(std::size_t total, const std::vector<double>& fractions) {
    std::vector<std::size_t> counts(fractions.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        double exact = fractions[i] * static_cast<double>(total);
        // Avoid 0.33 * 100 = 32.999999... flooring to 32.
        double fl = std::floor(exact + 1e-9);
        counts[i] = static_cast<std::size_t>(fl);
        assigned += counts[i];
        remainders.emplace_back(exact - fl, i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) counts[remainders[r % remainders.size()].second]++;
    return counts;
}

Dataset split_dataset(Dataset dataset, const SplitFractions& fr, std::uint64_t seed) {
    for (double f : {fr.train, fr.calibration, fr.test})
        if (f < 0.0 || f > 1.0) throw config_error("split fractions must lie in [0, 1]");
    if (std::abs(fr.train + fr.calibration + fr.test - 1.0) > 1e-9)
        throw config_error("split fractions must sum to 1");
    if (dataset.samples.size() < 3) throw input_error("splitting needs at least 3 samples");

    auto counts = largest_remainder_counts(dataset.samples.size(), {fr.train, fr.calibration, fr.test});
    std::vector<std::size_t> order(dataset.samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    dataset.split.clear();
    std::size_t cursor = 0;
    const Split kinds[] = {Split::Train, Split::Calibration, Split::Test};
    for (int s = 0; s < 3; ++s)
        for (std::size_t c = 0; c < counts[s]; ++c) dataset.split[dataset.samples[order[cursor++]].sample_id] = kinds[s];
    return dataset;
}

// ---- validation ------------------------------------------------------------

std::size_t ValidationReport::count(Violation::Kind kind) const {
    return static_cast<std::size_t>(
        std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.kind == kind; }));
}

ValidationReport validate_panel(const Panel& panel) {
    ValidationReport r;
    using K = Violation::Kind;
    std::set<std::string> seen;
    for (const auto& m : panel.marker_names)
        if (!seen.insert(m).second) r.violations.push_back({K::DuplicateMarker, "duplicate marker name " + m});
    for (const auto& ct : panel.cell_types) {
        for (const auto& [a, b] : ct.gating_pairs)
            if (a >= panel.marker_count() || b >= panel.marker_count())
                r.violations.push_back({K::GatingPairOutOfRange, "cell type " + ct.name + ": gating pair (" +
                                                                     std::to_string(a) + ", " + std::to_string(b) +
                                                                     ") out of range"});
        if (ct.parent && !panel.find_cell_type(*ct.parent))
            r.violations.push_back({K::UnknownParent, "cell type " + ct.name + ": unknown parent " + *ct.parent});
        // Walk the parent chain; more steps than cell types means a cycle.
        const CellTypeSpec* cur = &ct;
        std::size_t steps = 0;
        while (cur && cur->parent && steps <= panel.cell_types.size()) {
            cur = panel.find_cell_type(*cur->parent);
            ++steps;
        }
        if (steps > panel.cell_types.size())
            r.violations.push_back({K::ParentCycle, "cell type " + ct.name + ": parent chain has a cycle"});
    }
    return r;
}

ValidationReport validate_panel(const Panel& panel, const Dataset& dataset) {
    auto r = validate_panel(panel);
    using K = Violation::Kind;
    for (const auto& s : dataset.samples) {
        std::unordered_set<std::string> ids;
        if (!dataset.split.empty() && !dataset.split.count(s.sample_id))
            r.violations.push_back({K::UnassignedSample, "sample " + s.sample_id + " has no split"});
        for (const auto& e : s.events) {
            auto where = "sample " + s.sample_id + " event " + e.event_id + ": ";
            if (e.sample_id != s.sample_id)
                r.violations.push_back({K::SampleIdMismatch, where + "carries sample id " + e.sample_id});
            if (!ids.insert(e.event_id).second)
                r.violations.push_back({K::DuplicateEventId, where + "duplicate event id"});
            if (e.markers.size() != panel.marker_count())
                r.violations.push_back({K::MarkerCountMismatch, where + std::to_string(e.markers.size()) +
                                                                    " markers, panel has " +
                                                                    std::to_string(panel.marker_count())});
            for (const auto& ct : panel.cell_types) {
                if (!ct.parent) continue;
                auto child = e.label(ct.name);
                auto parent = e.label(*ct.parent);
                if (child && *child && parent && !*parent)
                    r.violations.push_back({K::HierarchyViolation,
                                            where + ct.name + "=1 but parent " + *ct.parent + "=0"});
            }
        }
    }
    return r;
}

}  // namespace uwrap
