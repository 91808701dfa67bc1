#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "uwrap/io_util.hpp"

namespace uwrap {

using MarkerPair = std::pair<std::size_t, std::size_t>;

struct CellTypeSpec {
    std::string name;
    std::optional<std::string> parent;
    std::vector<MarkerPair> gating_pairs;
};

struct Panel {
    std::vector<std::string> marker_names;
    std::vector<CellTypeSpec> cell_types;

    std::size_t marker_count() const { return marker_names.size(); }
    std::optional<std::size_t> marker_index(std::string_view name) const;
    const CellTypeSpec* find_cell_type(std::string_view name) const;
    const CellTypeSpec& cell_type(std::string_view name) const;  // throws lookup_error
    // Cell types ordered so that every parent precedes its children.
    std::vector<const CellTypeSpec*> topological_order() const;
};

// Distinct marker indices referenced by the gating pairs, ascending (panel order).
std::vector<std::size_t> gated_markers(const CellTypeSpec& spec);

struct Event {
    std::string sample_id;
    std::string event_id;
    std::vector<double> markers;
    std::map<std::string, bool> labels;       // absent key = unknown
    std::map<std::string, bool> predictions;  // absent key = not predicted

    std::optional<bool> label(const std::string& cell_type) const;
};

struct Sample {
    std::string sample_id;
    std::vector<Event> events;

    std::size_t size() const { return events.size(); }
};

enum class Split { Train, Calibration, Test };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

struct Dataset {
    Panel panel;
    std::vector<Sample> samples;
    std::map<std::string, Split> split;

    std::vector<const Sample*> samples_in(Split s) const;
    std::size_t event_count() const;
};

Panel panel_from_json(const json& j);
json panel_to_json(const Panel& panel);
Panel load_panel(const std::filesystem::path& path);

// Events CSV. Throws parse_error (naming the line) or schema_error.
Dataset parse_events_csv(std::string_view text, const Panel& panel, std::string_view source = "<csv>");
Dataset load_events_csv(const std::filesystem::path& path, const Panel& panel);

struct CsvWriteOptions {
    bool include_labels = true;
    bool include_predictions = true;
    bool include_split = true;
};
std::string format_events_csv(const Dataset& dataset, const CsvWriteOptions& opts = {});
void write_events_csv(const std::filesystem::path& path, const Dataset& dataset,
                      const CsvWriteOptions& opts = {});

struct SplitFractions {
    double train = 1.0 / 3.0;
    double calibration = 1.0 / 3.0;
    double test = 1.0 / 3.0;
};

// Sample counts per split by the largest-remainder rule.
std::vector<std::size_t> largest_remainder_counts(std::size_t total, const std::vector<double>& fractions);

// Whole-sample random assignment, deterministic in seed.
Dataset split_dataset(Dataset dataset, const SplitFractions& fractions, std::uint64_t seed);

struct Violation {
    enum class Kind {
        DuplicateMarker,
        GatingPairOutOfRange,
        UnknownParent,
        ParentCycle,
        MarkerCountMismatch,
        HierarchyViolation,
        SampleIdMismatch,
        DuplicateEventId,
        UnassignedSample,
    };
    Kind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::size_t count(Violation::Kind kind) const;
};

ValidationReport validate_panel(const Panel& panel);
ValidationReport validate_panel(const Panel& panel, const Dataset& dataset);

}  // namespace uwrap
