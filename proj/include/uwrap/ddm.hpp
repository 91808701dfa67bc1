#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uwrap/data_model.hpp"
#include "uwrap/transform.hpp"

namespace uwrap {

// The only view the wrapper gets of a data-driven model.
class Predictor {
public:
    virtual ~Predictor() = default;
    virtual bool predict(const Event& event) const = 0;
    virtual const std::string& cell_type() const = 0;
};

struct MlpHyperparams {
    std::size_t hidden_units = 16;
    std::size_t epochs = 30;
    double learning_rate = 0.05;
    std::size_t batch_size = 64;
    std::uint64_t seed = 1;
};

MlpHyperparams mlp_hyperparams_from_json(const json& j);
json mlp_hyperparams_to_json(const MlpHyperparams& h);

// One hidden tanh layer, logistic output, over standardized transformed markers.
struct MlpWeights {
    MarkerTransform transform;
    std::vector<double> input_mean;
    std::vector<double> input_sd;
    std::vector<std::vector<double>> hidden_w;  // hidden_units x inputs
    std::vector<double> hidden_b;
    std::vector<double> output_w;
    double output_b = 0.0;

    std::size_t inputs() const { return input_mean.size(); }
    double positive_probability(std::span<const double> markers) const;
};

// Keyed by (sample_id, event_id).
using PredictionTable = std::map<std::pair<std::string, std::string>, bool>;

class DdmModel final : public Predictor {
public:
    enum class Kind { BuiltinMlp, ExternalPredictions };

    struct TrainingMetadata {
        std::size_t event_count = 0;
        MlpHyperparams hyperparams;
    };

    static DdmModel builtin(std::string cell_type, MlpWeights weights, TrainingMetadata meta);
    static DdmModel external(std::string cell_type, PredictionTable table);

    bool predict(const Event& event) const override;
    const std::string& cell_type() const override { return cell_type_; }

    Kind kind() const { return kind_; }
    const MlpWeights& weights() const { return weights_; }
    const PredictionTable& table() const { return table_; }
    const TrainingMetadata& metadata() const { return meta_; }

private:
    std::string cell_type_;
    Kind kind_ = Kind::BuiltinMlp;
    MlpWeights weights_;
    PredictionTable table_;
    TrainingMetadata meta_;
};

// Throws training_error unless both classes have at least two events.
DdmModel train_ddm(std::span<const Event> events, const std::string& cell_type, const MlpHyperparams& hp,
                   const MarkerTransform& transform = {});

// Elementwise predict in event order; `threads` > 1 splits the range across workers.
std::vector<bool> predict_sample(const Predictor& ddm, const Sample& sample, unsigned threads = 1);

DdmModel load_external_predictions(const std::filesystem::path& path, const std::string& cell_type);
PredictionTable parse_predictions_csv(std::string_view text, std::string_view source = "<csv>");
std::string format_predictions_csv(const PredictionTable& table);
void write_predictions(const std::filesystem::path& path, const PredictionTable& table);

json ddm_to_json(const DdmModel& model);
DdmModel ddm_from_json(const json& j);
void save_ddm(const std::filesystem::path& path, const DdmModel& model);
DdmModel load_ddm(const std::filesystem::path& path);

}  // namespace uwrap
