#include <gtest/gtest.h>

#include <filesystem>

#include "test_support.hpp"
#include "uwrap/ddm.hpp"
#include "uwrap/error.hpp"

using namespace uwrap;

namespace {

std::vector<Event> training_events(std::size_t n, std::uint64_t seed) {
    auto s = generate_sample(testing_support::small_generator(n), seed, 0);
    return s.events;
}

MlpHyperparams quick() {
    MlpHyperparams hp;
    hp.epochs = 10;
    hp.seed = 3;
    return hp;
}

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("uwrap_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST(Ddm, LearnsSeparableClusters) {
    auto train = training_events(3000, 1);
    auto model = train_ddm(train, "R", quick());
    EXPECT_EQ(model.cell_type(), "R");
    EXPECT_EQ(model.metadata().event_count, 3000u);
    auto test = generate_sample(testing_support::small_generator(2000), 2, 0);
    auto pred = predict_sample(model, test);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) correct += pred[i] == *test.events[i].label("R");
    EXPECT_GT(static_cast<double>(correct) / static_cast<double>(test.size()), 0.98);
}

TEST(Ddm, TrainingIsDeterministic) {
    auto train = training_events(1000, 4);
    EXPECT_EQ(ddm_to_json(train_ddm(train, "S", quick())), ddm_to_json(train_ddm(train, "S", quick())));
    auto other = quick();
    other.seed = 4;
    EXPECT_NE(ddm_to_json(train_ddm(train, "S", quick())), ddm_to_json(train_ddm(train, "S", other)));
}

TEST(Ddm, ThreadedPredictionMatchesSerial) {
    auto model = train_ddm(training_events(800, 5), "R", quick());
    auto s = generate_sample(testing_support::small_generator(3001), 6, 0);
    EXPECT_EQ(predict_sample(model, s, 1), predict_sample(model, s, 4));
}

TEST(Ddm, TrainingErrors) {
    auto ev = training_events(50, 7);
    std::vector<Event> one_class;
    for (const auto& e : ev)
        if (!*e.label("R")) one_class.push_back(e);
    one_class.push_back(ev.front());
    one_class.back().labels["R"] = true;
    auto kind = [](auto f) {
        try {
            f();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Config;
    };
    EXPECT_EQ(kind([&] { train_ddm(one_class, "R", quick()); }), ErrorKind::Training);
    EXPECT_EQ(kind([&] { train_ddm(std::vector<Event>{}, "R", quick()); }), ErrorKind::Training);
    ev[3].labels.erase("R");
    EXPECT_EQ(kind([&] { train_ddm(ev, "R", quick()); }), ErrorKind::Schema);
}

TEST(Ddm, JsonFileRoundTrip) {
    auto model = train_ddm(training_events(600, 8), "R", quick());
    auto dir = temp_dir("ddm");
    save_ddm(dir / "m.json", model);
    auto back = load_ddm(dir / "m.json");
    EXPECT_EQ(ddm_to_json(back), ddm_to_json(model));
    auto s = generate_sample(testing_support::small_generator(500), 9, 0);
    EXPECT_EQ(predict_sample(back, s), predict_sample(model, s));
    EXPECT_THROW(ddm_from_json(json{{"cell_type", "R"}, {"kind", "forest"}, {"parameters", json::object()}}), Error);
}

TEST(Ddm, ExternalPredictions) {
    const std::string text = "sample_id,event_id,pred\nS1,e1,1\nS1,e2,0\n";
    auto table = parse_predictions_csv(text);
    EXPECT_EQ(table.size(), 2u);
    EXPECT_EQ(format_predictions_csv(table), text);
    auto dir = temp_dir("ext");
    write_predictions(dir / "p.csv", table);
    auto model = load_external_predictions(dir / "p.csv", "R");
    EXPECT_EQ(model.kind(), DdmModel::Kind::ExternalPredictions);
    EXPECT_TRUE(model.predict(testing_support::make_event("S1", "e1", {})));
    EXPECT_FALSE(model.predict(testing_support::make_event("S1", "e2", {})));
    try {
        model.predict(testing_support::make_event("S1", "e3", {}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Lookup);
    }
    EXPECT_THROW(parse_predictions_csv(text + "S1,e1,0\n"), Error);
    auto back = ddm_from_json(ddm_to_json(model));
    EXPECT_EQ(back.table(), table);
}
