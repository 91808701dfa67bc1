#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uwrap/data_model.hpp"
#include "uwrap/transform.hpp"

namespace uwrap {

// One Gaussian cluster in transformed marker space.
struct MixtureComponent {
    std::map<std::string, bool> labels;  // cell types not listed are negative
    double weight = 0.0;
    std::vector<double> mean;
    std::vector<double> sd;
};

struct GeneratorConfig {
    Panel panel;
    std::vector<MixtureComponent> components;
    std::size_t events_per_sample = 1000;
    double sample_shift_sd = 0.0;
    MarkerTransform transform;

    // Throws config_error on invalid weights, sds, dimensions or label hierarchy.
    void validate() const;
};

GeneratorConfig generator_config_from_json(const json& j, const Panel& panel);
json generator_config_to_json(const GeneratorConfig& c);

std::string sample_name(std::size_t sample_index);

// Deterministic in (seed, sample_index); each sample has its own random stream.
Sample generate_sample(const GeneratorConfig& config, std::uint64_t seed, std::size_t sample_index);

struct SplitCounts {
    std::size_t train = 1;
    std::size_t calibration = 1;
    std::size_t test = 1;
};

// Samples 0..train-1 go to train, then calibration, then test.
Dataset generate_dataset(const GeneratorConfig& config, const SplitCounts& counts, std::uint64_t seed);

enum class Quadrant { UL, UR, LL, LR };

Quadrant parse_quadrant(std::string_view s);
std::string_view to_string(Quadrant q);

struct QuadrantGate {
    MarkerPair pair;
    double threshold_x = 0.0;  // transformed units
    double threshold_y = 0.0;
    Quadrant quadrant = Quadrant::UR;
};

using QuadrantGates = std::map<std::string, QuadrantGate>;

QuadrantGates quadrant_gates_from_json(const json& j, const Panel& panel);
json quadrant_gates_to_json(const QuadrantGates& gates, const Panel& panel);

// Values on a threshold belong to the upper / right side.
bool in_quadrant(double x, double y, const QuadrantGate& gate);

// One label map per event. Gated cell types absent from `gates` are left unlabeled;
// a subtype is positive only when its parent is.
std::vector<std::map<std::string, bool>> quadrant_gate_labels(const Sample& sample, const Panel& panel,
                                                              const QuadrantGates& gates,
                                                              const MarkerTransform& transform);

}  // namespace uwrap
