// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include <doctest.h>

#include <random>
#include <set>

#include "appraisal/evaluation.hpp"
#include "support.hpp"

using namespace appraisal;
using appraisal::testing::CorpusBuilder;

namespace {

std::vector<std::string> project_ids(int n) {
    std::vector<std::string> out;
    for (int i = 1; i <= n; ++i) out.push_back("P" + std::to_string(100 + i));
    return out;
}

Prediction pred(SoftLabel truth, double value) {
    Prediction p;
    p.truth = truth;
    p.value = value;
    return p;
}

}  // namespace

TEST_CASE("make_folds") {
    SUBCASE("21 projects into 5 folds") {
        const auto plan = make_folds(project_ids(21), 5, 1);
        std::vector<std::size_t> sizes;
        for (const auto& f : plan.folds) sizes.push_back(f.size());
        CHECK(sizes == std::vector<std::size_t>{5, 4, 4, 4, 4});
        CHECK(plan.all_projects() == project_ids(21));
        for (std::size_t i = 0; i < plan.size(); ++i) {
            const auto train = plan.train_projects(i);
            CHECK(train.size() + plan.folds[i].size() == 21);
            for (const auto& p : plan.folds[i]) CHECK_FALSE(std::binary_search(train.begin(), train.end(), p));
        }
    }
    SUBCASE("k equal to the project count is leave-one-project-out") {
        const auto plan = make_folds(project_ids(4), 4, 9);
        for (const auto& f : plan.folds) CHECK(f.size() == 1);
    }
    SUBCASE("same seed same plan, order of input irrelevant") {
        auto ids = project_ids(12);
        const auto a = make_folds(ids, 3, 42);
        std::reverse(ids.begin(), ids.end());
        const auto b = make_folds(ids, 3, 42);
        CHECK(a.folds == b.folds);
        bool differs = false;
        for (std::uint64_t s = 0; s < 10 && !differs; ++s) differs = make_folds(ids, 3, s).folds != a.folds;
        CHECK(differs);
    }
    SUBCASE("range errors") {
        CHECK_THROWS_AS(make_folds(project_ids(4), 1, 0), std::invalid_argument);
        CHECK_THROWS_AS(make_folds(project_ids(4), 5, 0), std::invalid_argument);
    }
}

TEST_CASE("cross_validate") {
    // Two projects; features encode the label so every held-out project is
    // predicted from the other one.
    CorpusBuilder b;
    FeatureMap features;
    for (int p = 0; p < 2; ++p) {
        const std::string project = p == 0 ? "PA" : "PB";
        for (int i = 0; i < 10; ++i) {
            const std::string id = project + "-" + std::to_string(i);
            b.verbatim(id, project);
            const int v = i % 2 == 0 ? 1 : -1;
            b.votes(id, Dimension::Utility, {v, v, v});
            const std::vector<double> x = {v > 0 ? 1.0 : 0.0, v < 0 ? 1.0 : 0.0};
            features.emplace(id, FeatureVector::dense(x));
        }
    }
    b.verbatim("PA-nofeat", "PA").votes("PA-nofeat", Dimension::Utility, {0, 0, 0});
    b.verbatim("PC-0", "PC").votes("PC-0", Dimension::Utility, {1, 1, 1});
    features.emplace("PC-0", FeatureVector::dense(std::vector<double>{1.0, 0.0}));
    features.emplace("orphan", FeatureVector::dense(std::vector<double>{1.0, 0.0}));
    const Corpus corpus = b.build();

    const FoldPlan plan = make_folds({"PA", "PB"}, 2, 3);
    TrainConfig cfg;
    cfg.learning_rate = 0.5;
    cfg.epochs = 300;
    const auto result = cross_validate(corpus, features, Dimension::Utility, cfg, plan);

    CHECK(result.predictions.size() == 20);
    CHECK(result.skipped.missing_features == std::vector<std::string>{"PA-nofeat"});
    CHECK(result.skipped.missing_label == std::vector<std::string>{"orphan"});
    CHECK(result.skipped.unassigned_project == std::vector<std::string>{"PC-0"});
    CHECK(result.predictions.size() + result.skipped.total() == 23);

    for (const auto& [id, p] : result.predictions) {
        CHECK(plan.folds[p.fold] == std::vector<std::string>{p.project_id});
        CHECK(p.value * mean_value(p.truth) > 0.5);
    }
    REQUIRE(result.folds.size() == 2);
    for (const auto& log : result.folds) {
        CHECK(log.n_train == 10);
        CHECK(log.n_test == 10);
        for (const auto& p : log.test_projects) {
            CHECK(std::find(log.train_projects.begin(), log.train_projects.end(), p) == log.train_projects.end());
        }
    }

    SUBCASE("held-out predictions ignore test-project labels") {
        // flipping every label of the held-out project must not change its predictions
        CorpusBuilder flipped;
        for (const auto& v : corpus.verbatims) flipped.verbatim(v.id, v.project_id);
        for (const auto& r : corpus.records) {
            const bool in_pb = r.verbatim_id.starts_with("PB");
            flipped.vote(r.verbatim_id, r.annotator_id, r.dimension, in_pb ? -r.value.value() : r.value.value());
        }
        const auto again = cross_validate(flipped.build(), features, Dimension::Utility, cfg, plan);
        for (const auto& [id, p] : result.predictions) {
            if (id.starts_with("PB")) CHECK(again.predictions.at(id).value == p.value);
        }
    }
}

TEST_CASE("nearest_level and confusion_grid") {
    CHECK(nearest_level(0.40, 6) == 8);  // 2/6
    CHECK(nearest_level(1.0, 6) == 12);
    CHECK(nearest_level(7.0, 6) == 12);
    CHECK(nearest_level(-1.0, 6) == 0);
    CHECK(nearest_level(0.25, 2) == 2);   // midpoint of 0 and 1/2 goes to 0
    CHECK(nearest_level(-0.25, 2) == 1);  // midpoint of -1/2 and 0 goes to -1/2
    CHECK(nearest_level(0.0, 3) == 3);

    std::map<std::string, Prediction> ps;
    ps["a"] = pred(SoftLabel(0, 2, 4), 0.40);  // truth 4/6, predicted 2/6
    ps["b"] = pred(SoftLabel(0, 6, 0), 0.01);
    ps["c"] = pred(SoftLabel(6, 0, 0), -0.99);
    const auto grid = confusion_grid(ps, 6);
    CHECK(grid.levels() == 13);
    CHECK(grid.counts[10][8] == 1);
    CHECK(grid.counts[6][6] == 1);
    CHECK(grid.counts[0][0] == 1);
    CHECK(grid.total() == 3);
    CHECK(grid.row_normalized[10][8] == 1.0);
    CHECK(grid.band_mass(1) == doctest::Approx(2.0 / 3.0));
    CHECK(grid.band_mass(2) == 1.0);
    CHECK(grid.center(0) == -1.0);

    ps["d"] = pred(SoftLabel(0, 2, 1), 0.0);
    CHECK_THROWS_AS(confusion_grid(ps, 6), MixedAnnotatorCountError);

    std::ostringstream out;
    ps.erase("d");
    write_grid_csv(out, grid);
    CHECK(out.str().starts_with("true\\predicted,-1.000000,-0.833333"));
}

TEST_CASE("threshold_classify keeps the cutoffs in the zero class") {
    CHECK(threshold_classify(1.0 / 3.0) == 0);
    CHECK(threshold_classify(-1.0 / 3.0) == 0);
    CHECK(threshold_classify(std::nextafter(1.0 / 3.0, 1.0)) == 1);
    CHECK(threshold_classify(std::nextafter(-1.0 / 3.0, -1.0)) == -1);
    CHECK(threshold_classify(0.9) == 1);
}

TEST_CASE("threshold_report on a hand-scored fixture") {
    // truth classes:  +1  +1   0   0  -1   0     (2/6 sits on the cutoff -> 0)
    // predicted:      +1   0   0  +1  -1  -1
    std::map<std::string, Prediction> ps;
    ps["1"] = pred(SoftLabel(0, 0, 6), 0.8);
    ps["2"] = pred(SoftLabel(0, 2, 4), 0.2);
    ps["3"] = pred(SoftLabel(0, 6, 0), 0.0);
    ps["4"] = pred(SoftLabel(0, 4, 2), 0.5);
    ps["5"] = pred(SoftLabel(5, 1, 0), -0.9);
    ps["6"] = pred(SoftLabel(1, 5, 0), -0.4);
    const auto r = threshold_report(ps);
    CHECK(r.evaluated == 6);
    CHECK(r.support == std::array<std::size_t, 3>{1, 3, 2});
    CHECK(*r.precision[2] == doctest::Approx(0.5));
    CHECK(*r.recall[2] == doctest::Approx(0.5));
    CHECK(*r.precision[1] == doctest::Approx(0.5));
    CHECK(*r.recall[1] == doctest::Approx(1.0 / 3.0));
    CHECK(*r.precision[0] == doctest::Approx(0.5));
    CHECK(*r.recall[0] == doctest::Approx(1.0));
    CHECK(r.global_accuracy == doctest::Approx(0.5));

    SUBCASE("undefined precision is NA") {
        std::map<std::string, Prediction> one;
        one["x"] = pred(SoftLabel(0, 3, 0), 0.0);
        const auto s = threshold_report(one);
        CHECK_FALSE(s.precision[2].has_value());
        CHECK_FALSE(s.recall[2].has_value());
        std::ostringstream out;
        write_threshold_csv(out, {{Dimension::Legitimacy, s}});
        CHECK(out.str().find("precision_pos,NA") != std::string::npos);
    }
    CHECK_THROWS_AS(threshold_report({}), std::invalid_argument);
}

TEST_CASE("summary metrics") {
    std::map<std::string, Prediction> ps;
    ps["a"] = pred(SoftLabel(0, 0, 2), 0.5);
    ps["b"] = pred(SoftLabel(2, 0, 0), -1.0);
    CHECK(mean_squared_error(ps) == doctest::Approx(0.125));

    const std::vector<double> a{1, 2, 3, 4, 5}, b{5, 6, 7, 8, 7}, c{5, 4, 3, 2, 1};
    CHECK(spearman(a, a) == doctest::Approx(1.0));
    CHECK(spearman(a, c) == doctest::Approx(-1.0));
    // ranks of b: 1 2 3.5 5 3.5 -> rho = 0.8207826816681233
    CHECK(spearman(a, b) == doctest::Approx(0.8207826816681233));
    const std::vector<double> flat{2, 2, 2, 2, 2};
    CHECK(spearman(a, flat) == 0.0);
}
