// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "appraisal/aggregate.hpp"
#include "appraisal/corpus.hpp"
#include "appraisal/simulator.hpp"
#include "support.hpp"

using namespace appraisal;
using appraisal::testing::CorpusBuilder;

namespace {

const char* kTwoAnnotatorFile = R"({"kind":"project","id":"p1","name":"Concept"}
{"kind":"post","id":"t1","project_id":"p1","participant_id":"u1"}
{"kind":"verbatim","id":"v1","post_id":"t1","project_id":"p1","position":0,"text":"C'est très utile."}
{"kind":"annotation","verbatim_id":"v1","annotator_id":"a1","dimension":"U","value":1}
{"kind":"annotation","verbatim_id":"v1","annotator_id":"a2","dimension":"U","value":0}
)";

Corpus load(const std::string& text) {
    std::istringstream in(text);
    return load_corpus(in);
}

std::size_t error_line(const std::string& text) {
    try {
        load(text);
    } catch (const CorpusError& e) {
        return e.line();
    }
    return 0;
}

}  // namespace

TEST_CASE("dimension codes round-trip in canonical order") {
    std::string codes;
    for (Dimension d : kDimensions) {
        codes += dimension_code(d);
        CHECK(parse_dimension(dimension_code(d)) == d);
    }
    CHECK(codes == "FPUL");
    CHECK_FALSE(parse_dimension("X"));
}

TEST_CASE("annotation values outside {-1,0,1} are not representable") {
    CHECK_THROWS_AS(AnnotationValue(2), std::invalid_argument);
    CHECK_THROWS_AS(AnnotationValue(-2), std::invalid_argument);
    CHECK_FALSE(AnnotationValue::from_int(5));
    CHECK(AnnotationValue::from_int(-1)->value() == -1);
}

TEST_CASE("load_corpus") {
    SUBCASE("empty stream gives an empty, valid corpus") {
        const Corpus c = load("");
        CHECK(c.verbatims.empty());
        CHECK(c.records.empty());
        CHECK(validate(c).empty());
    }
    SUBCASE("one verbatim, two annotators") {
        const Corpus c = load(kTwoAnnotatorFile);
        CHECK(c.records.size() == 2);
        CHECK(c.annotators.size() == 2);
        CHECK(c.verbatims.at(0).text == "C'est très utile.");
        const auto labels = aggregate(c, Dimension::Utility);
        REQUIRE(labels.size() == 1);
        CHECK(labels.at("v1").p_pos() == 0.5);
        CHECK(labels.at("v1").p_zero() == 0.5);
    }
    SUBCASE("value +2 is rejected with its line number") {
        std::string text = kTwoAnnotatorFile;
        text += R"({"kind":"annotation","verbatim_id":"v1","annotator_id":"a3","dimension":"U","value":2})" "\n";
        CHECK(error_line(text) == 6);
    }
    SUBCASE("malformed JSON names the line") {
        CHECK(error_line("{\"kind\":\"project\",\"id\":\"p\",\"name\":\"n\"}\n{oops\n") == 2);
    }
    SUBCASE("duplicate (verbatim, annotator, dimension)") {
        std::string text = kTwoAnnotatorFile;
        text += R"({"kind":"annotation","verbatim_id":"v1","annotator_id":"a1","dimension":"U","value":0})" "\n";
        CHECK(error_line(text) == 6);
    }
    SUBCASE("dangling reference") {
        std::string text = kTwoAnnotatorFile;
        text += R"({"kind":"annotation","verbatim_id":"v9","annotator_id":"a1","dimension":"U","value":0})" "\n";
        CHECK_THROWS_WITH_AS(load(text), doctest::Contains("v9"), CorpusError);
    }
    SUBCASE("forward references resolve at end of stream") {
        std::string text = kTwoAnnotatorFile;
        std::vector<std::string> lines;
        std::istringstream in(text);
        for (std::string l; std::getline(in, l);) lines.push_back(l);
        std::reverse(lines.begin(), lines.end());
        std::string reversed;
        for (const auto& l : lines) reversed += l + "\n";
        Corpus a = load(text), b = load(reversed);
        canonicalize(a);
        canonicalize(b);
        CHECK(a == b);
    }
    SUBCASE("unknown dimension code") {
        CHECK(error_line(R"({"kind":"annotation","verbatim_id":"v","annotator_id":"a","dimension":"X","value":0})") == 1);
    }
}

TEST_CASE("write_corpus output reloads to an equal corpus") {
    SimulatorConfig cfg = SimulatorConfig::defaults();
    cfg.n_projects = 3;
    cfg.verbatims_per_project = 20;
    cfg.seed = 11;
    Corpus original = generate(cfg).corpus;
    original.verbatims.front().text = "Élan \"quoted\"\nnew line";
    const std::string once = testing::to_jsonl(original);
    Corpus reloaded = load(once);
    canonicalize(original);
    CHECK(reloaded == original);
    CHECK(testing::to_jsonl(reloaded) == once);
}

TEST_CASE("validate") {
    SUBCASE("consistent six-annotator corpus has an empty report") {
        CorpusBuilder b;
        for (int v = 0; v < 3; ++v) {
            b.verbatim("v" + std::to_string(v));
            b.votes("v" + std::to_string(v), Dimension::Utility, {1, 0, 0, 1, -1, 0});
        }
        CHECK(validate(b.build()).empty());
    }
    SUBCASE("verbatim judged by 5 of 6 annotators is flagged") {
        CorpusBuilder b;
        b.verbatim("v1").votes("v1", Dimension::Utility, {1, 0, 0, 1, 0, 0});
        b.verbatim("v2").votes("v2", Dimension::Utility, {1, 0, 0, 1, 0, 0});
        b.verbatim("v3").votes("v3", Dimension::Utility, {1, 0, 0, 1, 0, std::nullopt});
        const auto report = validate(b.build());
        REQUIRE(report.size() == 1);
        CHECK(report[0].severity == Severity::Warning);
        CHECK(report[0].code == "incomplete_coverage");
        CHECK(report[0].entity_id == "v3");
        CHECK(report[0].message.find("incomplete coverage") != std::string::npos);
        CHECK_FALSE(has_errors(report));
    }
    SUBCASE("record referencing a missing verbatim") {
        CorpusBuilder b;
        b.verbatim("v1").vote("v1", "A0", Dimension::Familiarity, 0).vote("ghost", "A0", Dimension::Familiarity, 1);
        const auto report = validate(b.build());
        REQUIRE(has_errors(report));
        auto it = std::find_if(report.begin(), report.end(), [](const Finding& f) { return f.entity_id == "ghost"; });
        REQUIRE(it != report.end());
        CHECK(it->code == "dangling_reference");
    }
    SUBCASE("duplicate records and post/project mismatch are errors") {
        Corpus c = CorpusBuilder().verbatim("v1").vote("v1", "A0", Dimension::Legitimacy, 1).build();
        c.records.push_back(c.records.front());
        c.projects.push_back({"P2", "other"});
        c.verbatims.front().project_id = "P2";
        const auto report = validate(c);
        CHECK(count_severity(report, Severity::Error) == 2);
    }
    SUBCASE("empty text is a warning") {
        Corpus c = CorpusBuilder().verbatim("v1", "P1", "").vote("v1", "A0", Dimension::Legitimacy, 1).build();
        const auto report = validate(c);
        REQUIRE(report.size() == 1);
        CHECK(report[0].code == "empty_text");
    }
}

TEST_CASE("descriptive_stats") {
    SUBCASE("empty corpus is an error") { CHECK_THROWS_WITH(descriptive_stats(Corpus{}), "no verbatims"); }

    SUBCASE("all-zero records leave every dimension unannotated") {
        CorpusBuilder b;
        for (int v = 0; v < 4; ++v) {
            const std::string id = "v" + std::to_string(v);
            b.verbatim(id);
            for (Dimension d : kDimensions) b.votes(id, d, {0, 0, 0});
        }
        const auto stats = descriptive_stats(b.build());
        for (const auto& s : stats.per_dimension) CHECK(s.fraction_unannotated == 1.0);
        CHECK(stats.fraction_negative == 0.0);
    }

    SUBCASE("hand-placed four-verbatim fixture") {
        // Familiarity: v0 {+1,0}, v1 {-1,+1}, v2 {0,0}, v3 {-1,-1}
        // Utility:     v0 {+1,+1}, others {0,0}
        CorpusBuilder b;
        b.verbatim("v0", "P1").verbatim("v1", "P1").verbatim("v2", "P2").verbatim("v3", "P2");
        b.votes("v0", Dimension::Familiarity, {1, 0}).votes("v1", Dimension::Familiarity, {-1, 1});
        b.votes("v2", Dimension::Familiarity, {0, 0}).votes("v3", Dimension::Familiarity, {-1, -1});
        b.votes("v0", Dimension::Utility, {1, 1});
        for (const char* v : {"v1", "v2", "v3"}) b.votes(v, Dimension::Utility, {0, 0});
        const auto stats = descriptive_stats(b.build());

        const auto& fam = stats.per_dimension[index_of(Dimension::Familiarity)];
        CHECK(fam.fraction_unannotated == 0.25);
        CHECK(fam.fraction_any_negative == 0.5);
        CHECK(fam.fraction_any_positive == 0.5);
        const auto& util = stats.per_dimension[index_of(Dimension::Utility)];
        CHECK(util.fraction_unannotated == 0.75);
        CHECK(util.fraction_any_positive == 0.25);
        // Pleasantness has no records at all: unannotated
        CHECK(stats.per_dimension[index_of(Dimension::Pleasantness)].fraction_unannotated == 1.0);
        // negative (verbatim, dimension) pairs: v1/F, v3/F -> 2 of 16
        CHECK(stats.fraction_negative == 2.0 / 16.0);

        // A1 in P2 on Familiarity judged v2 (0), v3 (-1)
        auto g = std::find_if(stats.per_group.begin(), stats.per_group.end(), [](const GroupProportions& p) {
            return p.annotator_id == "A1" && p.project_id == "P2" && p.dimension == Dimension::Familiarity;
        });
        REQUIRE(g != stats.per_group.end());
        CHECK(g->verbatims == 2);
        CHECK(g->proportion_negative == 0.5);
        CHECK(g->proportion_positive == 0.0);
    }

    SUBCASE("unannotated plus annotated shares sum to one; record order does not matter") {
        SimulatorConfig cfg = SimulatorConfig::defaults();
        cfg.n_projects = 4;
        cfg.verbatims_per_project = 50;
        Corpus c = generate(cfg).corpus;
        const auto before = descriptive_stats(c);
        std::mt19937 shuffle_rng(3);
        std::shuffle(c.records.begin(), c.records.end(), shuffle_rng);
        const auto after = descriptive_stats(c);

        const RecordIndex index(c);
        for (Dimension d : kDimensions) {
            std::size_t annotated = 0;
            for (const auto& v : c.verbatims) {
                const auto& votes = index.votes(v.id, d);
                annotated += std::any_of(votes.begin(), votes.end(), [](const auto& x) { return !x.value.is_zero(); });
            }
            const auto& s = before.per_dimension[index_of(d)];
            CHECK(s.fraction_unannotated + static_cast<double>(annotated) / c.verbatims.size() == doctest::Approx(1.0));
            CHECK(s.fraction_unannotated == after.per_dimension[index_of(d)].fraction_unannotated);
            CHECK(s.fraction_any_negative == after.per_dimension[index_of(d)].fraction_any_negative);
        }
        CHECK(before.per_group.size() == after.per_group.size());
        for (std::size_t i = 0; i < before.per_group.size(); ++i) {
            CHECK(before.per_group[i].proportion_positive == after.per_group[i].proportion_positive);
        }
    }
}

TEST_CASE("stats CSV has one row per dimension and per group") {
    CorpusBuilder b;
    b.verbatim("v0").votes("v0", Dimension::Utility, {1, 0});
    std::ostringstream out;
    write_stats_csv(out, descriptive_stats(b.build()));
    std::istringstream in(out.str());
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    // header + 4 dimension rows + 2 annotators x 1 project x 1 dimension + global
    CHECK(rows == 1 + 4 + 2 + 1);
}
