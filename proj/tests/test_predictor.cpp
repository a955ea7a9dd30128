#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "arc/experiment.hpp"
#include "arc/predictor.hpp"
#include "arc/workloads.hpp"

using namespace arc;

namespace {

const std::vector<std::string> kCores{"core1", "core2", "core3", "core4"};

TrainingSet make_set(std::vector<std::string> features) {
    TrainingSet t;
    t.feature_names = std::move(features);
    t.labels = kCores;
    return t;
}

FeatureVector fv(std::initializer_list<std::pair<const char*, double>> kv) {
    FeatureVector v;
    for (const auto& [k, x] : kv) v.set(k, x);
    return v;
}

double accuracy(const DecisionTree& tree, const TrainingSet& data) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < data.size(); ++i) ok += tree.predict_row(data.rows[i]) == data.targets[i];
    return static_cast<double>(ok) / static_cast<double>(data.size());
}

}  // namespace

TEST_CASE("gini values") {
    std::vector<std::uint64_t> pure{8, 0}, even{5, 5}, three{2, 1, 1}, zero{0, 0};
    CHECK(gini(pure) == 0.0);
    CHECK(gini(even) == doctest::Approx(0.5));
    CHECK(gini(three) == doctest::Approx(0.625));
    CHECK_THROWS_AS(gini(zero), std::invalid_argument);
}

TEST_CASE("gini bounds") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 500; ++i) {
        std::vector<std::uint64_t> c(1 + rng() % 6);
        for (auto& x : c) x = rng() % 20;
        c[0] += 1;
        const double g = gini(c);
        CHECK(g >= 0.0);
        CHECK(g < 1.0);
        const auto nonzero = std::count_if(c.begin(), c.end(), [](std::uint64_t x) { return x > 0; });
        CHECK((g == 0.0) == (nonzero == 1));
    }
    for (std::uint64_t m = 1; m <= 8; ++m) {
        std::vector<std::uint64_t> c(m, 7);
        CHECK(gini(c) == doctest::Approx(1.0 - 1.0 / static_cast<double>(m)));
    }
}

TEST_CASE("separable data needs one split") {
    auto data = make_set({"x"});
    for (int i = 0; i < 10; ++i) data.add(fv({{"x", static_cast<double>(i)}}), i < 4 ? "core1" : "core3");
    auto tree = train_tree(data);
    CHECK(tree.depth() == 1);
    CHECK(tree.leaf_count() == 2);
    CHECK(accuracy(tree, data) == 1.0);
    CHECK(tree.nodes()[0].threshold == doctest::Approx(3.5));
    CHECK(tree.predict(fv({{"x", 3.5}})) == "core1");
    CHECK(tree.predict(fv({{"x", 3.6}})) == "core3");
}

TEST_CASE("pure data gives a leaf-only tree") {
    auto data = make_set({"x", "y"});
    for (int i = 0; i < 6; ++i) data.add(fv({{"x", i * 1.0}, {"y", -i * 2.0}}), "core4");
    auto tree = train_tree(data);
    CHECK(tree.depth() == 0);
    CHECK(tree.leaf_count() == 1);
    CHECK(tree.predict(fv({{"x", 99.0}, {"y", 0.0}})) == "core4");
    CHECK(tree.rank(fv({{"x", 0.0}, {"y", 0.0}})) == std::vector<std::string>{"core4", "core1", "core2", "core3"});
    for (double v : tree.feature_importance()) CHECK(v == 0.0);

    CHECK_THROWS_AS(train_tree(make_set({"x"})), std::invalid_argument);
    CHECK_THROWS_AS(data.add(fv({{"x", 1.0}, {"y", 1.0}}), "core9"), std::invalid_argument);
}

TEST_CASE("missing feature at prediction") {
    auto data = make_set({"x", "y"});
    data.add(fv({{"x", 0.0}, {"y", 0.0}}), "core1");
    data.add(fv({{"x", 1.0}, {"y", 0.0}}), "core2");
    auto tree = train_tree(data);
    CHECK_THROWS_AS(tree.predict(fv({{"x", 0.0}})), std::invalid_argument);
}

TEST_CASE("ranking order") {
    auto data = make_set({"x"});
    for (int i = 0; i < 5; ++i) data.add(fv({{"x", 10.0}}), "core3");
    for (int i = 0; i < 2; ++i) data.add(fv({{"x", 10.0}}), "core4");
    for (int i = 0; i < 4; ++i) data.add(fv({{"x", 0.0}}), "core1");
    data.add(fv({{"x", 0.0}}), "core2");
    auto tree = train_tree(data, {1, 1});
    auto r = tree.rank(fv({{"x", 10.0}}));
    REQUIRE(r.size() == 4);
    CHECK(r[0] == "core3");
    CHECK(r[1] == "core4");
    CHECK(r[2] == "core1");
    CHECK(r[3] == "core2");
    CHECK(tree.rank(fv({{"x", 0.0}}))[0] == tree.predict(fv({{"x", 0.0}})));

    auto stump = train_tree(data, {0, 1});
    CHECK(stump.depth() == 0);
    CHECK(stump.rank(fv({{"x", 3.0}})) == std::vector<std::string>{"core3", "core1", "core4", "core2"});
}

TEST_CASE("rankings are permutations and start with the prediction") {
    std::mt19937_64 rng(17);
    auto data = make_set({"a", "b", "c"});
    for (int i = 0; i < 120; ++i) {
        double a = rng() % 100, b = rng() % 100, c = rng() % 100;
        data.add(fv({{"a", a}, {"b", b}, {"c", c}}), kCores[(static_cast<int>(a + b) / 50) % 4]);
    }
    for (int depth : {0, 1, 2, 3, 5}) {
        auto tree = train_tree(data, {depth, 2});
        for (int i = 0; i < 50; ++i) {
            auto x = fv({{"a", static_cast<double>(rng() % 100)}, {"b", static_cast<double>(rng() % 100)},
                         {"c", static_cast<double>(rng() % 100)}});
            auto r = tree.rank(x);
            CHECK(r.front() == tree.predict(x));
            CHECK(std::set<std::string>(r.begin(), r.end()) == std::set<std::string>(kCores.begin(), kCores.end()));
            CHECK(r.size() == kCores.size());
        }
    }
}

TEST_CASE("leaf counts sum to routed rows") {
    std::mt19937_64 rng(2);
    auto data = make_set({"a", "b"});
    for (int i = 0; i < 80; ++i) {
        double a = rng() % 10, b = rng() % 10;
        data.add(fv({{"a", a}, {"b", b}}), kCores[(a > 4) * 2 + (b > 6)]);
    }
    auto tree = train_tree(data, {3, 3});
    std::vector<std::uint64_t> routed(tree.nodes().size(), 0);
    for (const auto& row : data.rows) ++routed[tree.leaf_for(row)];
    for (std::size_t n = 0; n < tree.nodes().size(); ++n) {
        const auto& node = tree.nodes()[n];
        if (!node.is_leaf()) continue;
        CHECK(node.samples() == routed[n]);
        CHECK(node.samples() >= 3);
    }
}

TEST_CASE("serialization round trip") {
    std::mt19937_64 rng(8);
    auto data = make_set({"a", "b", "c"});
    for (int i = 0; i < 60; ++i) {
        double a = (rng() % 1000) / 7.0, b = (rng() % 1000) / 3.0, c = (rng() % 1000) * 1e-5;
        data.add(fv({{"a", a}, {"b", b}, {"c", c}}), kCores[(a > 70) + 2 * (c > 0.005)]);
    }
    data.provenance = "profiled on core1 for 100000 instructions";
    auto tree = train_tree(data, {4, 1});
    auto text = tree.serialize();
    auto back = DecisionTree::deserialize(text);
    CHECK(back == tree);
    CHECK(back.serialize() == text);
    CHECK(train_tree(data, {4, 1}).serialize() == text);
    CHECK(back.metadata().at("provenance") == data.provenance);

    auto path = std::filesystem::temp_directory_path() / "arc_tree_roundtrip.txt";
    tree.save(path.string());
    CHECK(DecisionTree::load(path.string()) == tree);
    std::filesystem::remove(path);
    CHECK_THROWS(DecisionTree::deserialize("not a tree\n"));
}

TEST_CASE("strictly increasing transforms leave predictions unchanged") {
    std::mt19937_64 rng(23);
    auto data = make_set({"a", "b"});
    auto warped = make_set({"a", "b"});
    auto warp = [](double x) { return std::exp(x / 20.0) - 3.0; };
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 100; ++i) {
        double a = rng() % 100, b = rng() % 100;
        auto label = kCores[(a > 30) + (b > 60) + (a > 80)];
        data.add(fv({{"a", a}, {"b", b}}), label);
        warped.add(fv({{"a", warp(a)}, {"b", b}}), label);
    }
    auto t1 = train_tree(data);
    auto t2 = train_tree(warped);
    for (int i = 0; i < 300; ++i) {
        double a = rng() % 100, b = rng() % 100;
        CHECK(t1.predict(fv({{"a", a}, {"b", b}})) == t2.predict(fv({{"a", warp(a)}, {"b", b}})));
    }
}

TEST_CASE("feature selection") {
    std::mt19937_64 rng(5);
    auto data = make_set({"noise1", "constant", "label", "noise2"});
    for (int i = 0; i < 80; ++i) {
        const std::size_t k = rng() % 4;
        data.add(fv({{"noise1", static_cast<double>(rng() % 50)},
                     {"constant", 7.0},
                     {"label", static_cast<double>(k)},
                     {"noise2", static_cast<double>(rng() % 50)}}),
                 kCores[k]);
    }
    auto top = select_features(data, 1);
    REQUIRE(top.features.size() == 1);
    CHECK(top.features[0] == "label");
    CHECK(top.importance[0] == doctest::Approx(1.0));

    auto all = select_features(data, 4);
    CHECK(std::set<std::string>(all.features.begin(), all.features.end()) ==
          std::set<std::string>(data.feature_names.begin(), data.feature_names.end()));
    CHECK_FALSE(all.clamped);
    for (std::size_t i = 0; i < all.features.size(); ++i) {
        if (all.features[i] == "constant") CHECK(all.importance[i] == 0.0);
    }

    auto clamped = select_features(data, 9);
    CHECK(clamped.clamped);
    CHECK(clamped.features.size() == 4);
    CHECK(select_features(data, 3).features == select_features(data, 3).features);
    CHECK_THROWS_AS(select_features(data, 0), std::invalid_argument);
}

TEST_CASE("per-constraint feature sets") {
    using namespace features;
    CHECK(for_constraint(Constraint{ConstraintKind::None}) ==
          std::vector<std::string>{kL1dHits, kL1dReadMisses, kL1dTotalMisses, kL1iTotalMisses, kMemBusUtilRead});
    CHECK(for_constraint(Constraint{ConstraintKind::Slack10}) ==
          std::vector<std::string>{kL1dReadMisses, kMemIdleTime, kMemReadHits});
    CHECK(for_constraint(Constraint{ConstraintKind::Slack20}) ==
          std::vector<std::string>{kL1dHits, kL1dReadAccesses, kL1dReadMisses, kMemIdleTime, kMemBusUtilWrite});
    const auto u = universe();
    CHECK(u.size() == 9);
    for (auto c : Constraint::all()) {
        for (const auto& f : for_constraint(c)) CHECK(std::find(u.begin(), u.end(), f) != u.end());
    }
}

TEST_CASE("extracted features are rates and ratios") {
    SynthParams p;
    p.total_instructions = 300'000;
    auto t = gen_synthetic(p);
    auto core = defaults::arc_system().core("core1");
    auto r = simulate_run(t.events, core, core.operating_freq, PowerModel{});
    auto f = extract_features(r);
    for (const auto& name : features::universe()) CHECK(f.has(name));
    CHECK(f.at(features::kMemBusUtilRead) >= 0.0);
    CHECK(f.at(features::kMemBusUtilRead) <= 1.0);
    CHECK(f.at(features::kMemBusUtilWrite) >= 0.0);
    CHECK(f.at(features::kMemBusUtilWrite) <= 1.0);
    const double scale = 1e6 / static_cast<double>(r.instructions);
    CHECK(f.at(features::kL1dHits) == doctest::Approx(static_cast<double>(r.stats.hits()) * scale));
    CHECK(f.at(features::kL1dTotalMisses) == doctest::Approx(static_cast<double>(r.stats.misses()) * scale));
}

TEST_CASE("oracle-labelled workloads are learned exactly") {
    const auto sys = defaults::arc_system();
    const PowerModel power;
    RuntimeOptions opts;
    opts.profiling_instructions = 100'000;
    std::vector<AppRecord> apps;
    for (const auto& w : synthetic_suite(16, 41, 400'000, "fit")) apps.push_back(characterize(w, sys, power, opts));
    const Constraint none{ConstraintKind::None};
    auto data = build_training_set(apps, sys, none);
    REQUIRE(data.size() == 16);
    std::set<std::size_t> distinct(data.targets.begin(), data.targets.end());
    CHECK(distinct.size() >= 2);
    for (std::size_t i = 0; i < apps.size(); ++i) {
        CHECK(data.labels[data.targets[i]] == label_oracle(apps[i].trace().events, sys, power, none));
    }
    for (int depth : {3, 4, 5, 8}) {
        auto tree = train_tree(data, {depth, 1});
        CHECK(accuracy(tree, data) == 1.0);
        CHECK(tree.leaf_count() <= 16);
    }
}
