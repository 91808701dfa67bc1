#include "uwrap/ddm.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "uwrap/error.hpp"

namespace uwrap {

MlpHyperparams mlp_hyperparams_from_json(const json& j) {
    MlpHyperparams h;
    if (j.is_null()) return h;
    h.hidden_units = j.value("hidden_units", h.hidden_units);
    h.epochs = j.value("epochs", h.epochs);
    h.learning_rate = j.value("learning_rate", h.learning_rate);
    h.batch_size = j.value("batch_size", h.batch_size);
    h.seed = j.value("seed", h.seed);
    if (h.hidden_units == 0 || h.batch_size == 0 || !(h.learning_rate > 0.0))
        throw config_error("invalid DDM hyperparameters");
    return h;
}

json mlp_hyperparams_to_json(const MlpHyperparams& h) {
    return {{"hidden_units", h.hidden_units},
            {"epochs", h.epochs},
            {"learning_rate", h.learning_rate},
            {"batch_size", h.batch_size},
            {"seed", h.seed}};
}

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

double MlpWeights::positive_probability(std::span<const double> markers) const {
    if (markers.size() != inputs())
        throw input_error("DDM expects " + std::to_string(inputs()) + " markers, got " +
                          std::to_string(markers.size()));
    std::vector<double> x(inputs());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = (transform.apply(markers[i]) - input_mean[i]) / input_sd[i];
    double z = output_b;
    for (std::size_t h = 0; h < hidden_b.size(); ++h) {
        double a = hidden_b[h];
        for (std::size_t i = 0; i < x.size(); ++i) a += hidden_w[h][i] * x[i];
        z += output_w[h] * std::tanh(a);
    }
    return sigmoid(z);
}

DdmModel DdmModel::builtin(std::string cell_type, MlpWeights weights, TrainingMetadata meta) {
    DdmModel m;
    m.cell_type_ = std::move(cell_type);
    m.kind_ = Kind::BuiltinMlp;
    m.weights_ = std::move(weights);
    m.meta_ = meta;
    return m;
}

DdmModel DdmModel::external(std::string cell_type, PredictionTable table) {
    DdmModel m;
    m.cell_type_ = std::move(cell_type);
    m.kind_ = Kind::ExternalPredictions;
    m.meta_.event_count = table.size();
    m.table_ = std::move(table);
    return m;
}

bool DdmModel::predict(const Event& event) const {
    if (kind_ == Kind::BuiltinMlp) return weights_.positive_probability(event.markers) >= 0.5;
    auto it = table_.find({event.sample_id, event.event_id});
    if (it == table_.end())
        throw lookup_error("no external prediction for sample " + event.sample_id + " event " + event.event_id);
    return it->second;
}

DdmModel train_ddm(std::span<const Event> events, const std::string& cell_type, const MlpHyperparams& hp,
                   const MarkerTransform& transform) {
    if (events.empty()) throw training_error("no training events for " + cell_type);
    const std::size_t d = events.front().markers.size();
    const std::size_t n = events.size();
    std::vector<double> x(n * d);
    std::vector<double> y(n);
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = events[i];
        if (e.markers.size() != d) throw input_error("training events have inconsistent marker counts");
        auto lab = e.label(cell_type);
        if (!lab) throw schema_error("training event " + e.event_id + " has no label for " + cell_type);
        y[i] = *lab ? 1.0 : 0.0;
        positives += *lab ? 1 : 0;
        for (std::size_t j = 0; j < d; ++j) x[i * d + j] = transform.apply(e.markers[j]);
    }
    if (positives < 2 || n - positives < 2)
        throw training_error("training set for " + cell_type + " needs at least two events of each class");

    MlpWeights w;
    w.transform = transform;
    w.input_mean.assign(d, 0.0);
    w.input_sd.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) w.input_mean[j] += x[i * d + j];
    for (auto& m : w.input_mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double dv = x[i * d + j] - w.input_mean[j];
            w.input_sd[j] += dv * dv;
        }
    for (auto& s : w.input_sd) s = std::max(std::sqrt(s / static_cast<double>(n)), 1e-9);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) x[i * d + j] = (x[i * d + j] - w.input_mean[j]) / w.input_sd[j];

    const std::size_t hu = hp.hidden_units;
    std::mt19937_64 rng(hp.seed);
    std::uniform_real_distribution<double> init_h(-std::sqrt(6.0 / double(d + hu)), std::sqrt(6.0 / double(d + hu)));
    std::uniform_real_distribution<double> init_o(-std::sqrt(6.0 / double(hu + 1)), std::sqrt(6.0 / double(hu + 1)));
    w.hidden_w.assign(hu, std::vector<double>(d));
    for (auto& row : w.hidden_w)
        for (auto& v : row) v = init_h(rng);
    w.hidden_b.assign(hu, 0.0);
    w.output_w.resize(hu);
    for (auto& v : w.output_w) v = init_o(rng);
    w.output_b = 0.0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> act(hu), g_hw(hu * d), g_hb(hu), g_ow(hu);
    for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += hp.batch_size) {
            const std::size_t end = std::min(n, start + hp.batch_size);
            std::fill(g_hw.begin(), g_hw.end(), 0.0);
            std::fill(g_hb.begin(), g_hb.end(), 0.0);
            std::fill(g_ow.begin(), g_ow.end(), 0.0);
            double g_ob = 0.0;
            for (std::size_t b = start; b < end; ++b) {
                const double* xi = &x[order[b] * d];
                double z = w.output_b;
                for (std::size_t h = 0; h < hu; ++h) {
                    double a = w.hidden_b[h];
                    for (std::size_t j = 0; j < d; ++j) a += w.hidden_w[h][j] * xi[j];
                    act[h] = std::tanh(a);
                    z += w.output_w[h] * act[h];
                }
                // d(log-loss)/dz for a logistic output.
                const double dz = sigmoid(z) - y[order[b]];
                g_ob += dz;
                for (std::size_t h = 0; h < hu; ++h) {
                    g_ow[h] += dz * act[h];
                    const double da = dz * w.output_w[h] * (1.0 - act[h] * act[h]);
                    g_hb[h] += da;
                    for (std::size_t j = 0; j < d; ++j) g_hw[h * d + j] += da * xi[j];
                }
            }
            const double step = hp.learning_rate / static_cast<double>(end - start);
            w.output_b -= step * g_ob;
            for (std::size_t h = 0; h < hu; ++h) {
                w.output_w[h] -= step * g_ow[h];
                w.hidden_b[h] -= step * g_hb[h];
                for (std::size_t j = 0; j < d; ++j) w.hidden_w[h][j] -= step * g_hw[h * d + j];
            }
        }
    }
    return DdmModel::builtin(cell_type, std::move(w), {n, hp});
}

std::vector<bool> predict_sample(const Predictor& ddm, const Sample& sample, unsigned threads) {
    const std::size_t n = sample.size();
    if (threads <= 1 || n < 2) {
        std::vector<bool> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = ddm.predict(sample.events[i]);
        return out;
    }
    // vector<bool> is not safe for concurrent writes; collect bytes first.
    std::vector<char> flags(n);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t * chunk; i < std::min(n, (t + 1) * chunk); ++i)
                    flags[i] = ddm.predict(sample.events[i]) ? 1 : 0;
            } catch (...) {
                failures[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    return {flags.begin(), flags.end()};
}

PredictionTable parse_predictions_csv(std::string_view text, std::string_view source) {
    PredictionTable table;
    std::size_t pos = 0, line_no = 0;
    bool header = true;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        auto where = std::string(source) + ": line " + std::to_string(line_no) + ": ";
        if (header) {
            if (line != "sample_id,event_id,pred") throw schema_error(where + "expected header sample_id,event_id,pred");
            header = false;
            continue;
        }
        if (line.empty()) continue;
        auto f = split_fields(line);
        if (f.size() != 3) throw parse_error(where + "expected 3 columns");
        if (f[2] != "0" && f[2] != "1") throw parse_error(where + "pred must be 0 or 1");
        auto [it, inserted] = table.try_emplace({std::string(f[0]), std::string(f[1])}, f[2] == "1");
        if (!inserted) throw schema_error(where + "duplicate event id " + std::string(f[1]));
    }
    if (header) throw schema_error(std::string(source) + ": missing header");
    return table;
}

DdmModel load_external_predictions(const std::filesystem::path& path, const std::string& cell_type) {
    return DdmModel::external(cell_type, parse_predictions_csv(read_text_file(path), path.string()));
}

std::string format_predictions_csv(const PredictionTable& table) {
    std::string out = "sample_id,event_id,pred\n";
    for (const auto& [key, pred] : table) out += key.first + "," + key.second + (pred ? ",1\n" : ",0\n");
    return out;
}

void write_predictions(const std::filesystem::path& path, const PredictionTable& table) {
    write_file_atomic(path, format_predictions_csv(table));
}

json ddm_to_json(const DdmModel& model) {
    json j{{"cell_type", model.cell_type()}};
    if (model.kind() == DdmModel::Kind::BuiltinMlp) {
        const auto& w = model.weights();
        j["kind"] = "builtin_mlp";
        j["parameters"] = {{"transform", transform_to_json(w.transform)},
                           {"input_mean", w.input_mean},
                           {"input_sd", w.input_sd},
                           {"hidden_w", w.hidden_w},
                           {"hidden_b", w.hidden_b},
                           {"output_w", w.output_w},
                           {"output_b", w.output_b}};
        j["training"] = {{"event_count", model.metadata().event_count},
                         {"hyperparams", mlp_hyperparams_to_json(model.metadata().hyperparams)}};
    } else {
        j["kind"] = "external_predictions";
        json rows = json::array();
        for (const auto& [key, pred] : model.table()) rows.push_back({key.first, key.second, pred ? 1 : 0});
        j["parameters"] = {{"predictions", rows}};
    }
    return j;
}

DdmModel ddm_from_json(const json& j) {
    try {
        auto ct = j.at("cell_type").get<std::string>();
        auto kind = j.at("kind").get<std::string>();
        const auto& p = j.at("parameters");
        if (kind == "builtin_mlp") {
            MlpWeights w;
            w.transform = transform_from_json(p.at("transform"));
            w.input_mean = p.at("input_mean").get<std::vector<double>>();
            w.input_sd = p.at("input_sd").get<std::vector<double>>();
            w.hidden_w = p.at("hidden_w").get<std::vector<std::vector<double>>>();
            w.hidden_b = p.at("hidden_b").get<std::vector<double>>();
            w.output_w = p.at("output_w").get<std::vector<double>>();
            w.output_b = p.at("output_b").get<double>();
            DdmModel::TrainingMetadata meta;
            if (j.contains("training")) {
                meta.event_count = j["training"].value("event_count", std::size_t{0});
                meta.hyperparams = mlp_hyperparams_from_json(j["training"].value("hyperparams", json()));
            }
            return DdmModel::builtin(ct, std::move(w), meta);
        }
        if (kind == "external_predictions") {
            PredictionTable t;
            for (const auto& r : p.at("predictions")) {
                auto [it, inserted] = t.try_emplace({r.at(0).get<std::string>(), r.at(1).get<std::string>()},
                                                    r.at(2).get<int>() != 0);
                if (!inserted) throw schema_error("duplicate event id in stored predictions");
            }
            return DdmModel::external(ct, std::move(t));
        }
        throw schema_error("unknown DDM kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw schema_error(std::string("invalid DDM model JSON: ") + e.what());
    }
}

void save_ddm(const std::filesystem::path& path, const DdmModel& model) { save_json_file(path, ddm_to_json(model)); }

DdmModel load_ddm(const std::filesystem::path& path) { return ddm_from_json(load_json_file(path)); }

}  // namespace uwrap
