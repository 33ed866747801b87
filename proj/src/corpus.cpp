// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include "appraisal/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "csv.hpp"

namespace appraisal {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kCodes = {"F", "P", "U", "L"};
constexpr std::array<std::string_view, 4> kNames = {"Familiarity", "Pleasantness", "Utility",
                                                    "Legitimacy"};

}  // namespace

std::string_view dimension_code(Dimension d) noexcept { return kCodes[index_of(d)]; }
std::string_view dimension_name(Dimension d) noexcept { return kNames[index_of(d)]; }

std::optional<Dimension> parse_dimension(std::string_view code) noexcept {
    for (Dimension d : kDimensions) {
        if (code == dimension_code(d) || code == dimension_name(d)) return d;
    }
    return std::nullopt;
}

AnnotationValue::AnnotationValue(int v) : value_(v) {
    if (v < -1 || v > 1) throw std::invalid_argument("annotation value must be -1, 0 or 1");
}

std::optional<AnnotationValue> AnnotationValue::from_int(long long v) noexcept {
    if (v < -1 || v > 1) return std::nullopt;
    return AnnotationValue(static_cast<int>(v));
}

void canonicalize(Corpus& corpus) {
    auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
    std::sort(corpus.projects.begin(), corpus.projects.end(), by_id);
    std::sort(corpus.posts.begin(), corpus.posts.end(), by_id);
    std::sort(corpus.verbatims.begin(), corpus.verbatims.end(), by_id);
    std::sort(corpus.records.begin(), corpus.records.end(),
              [](const AnnotationRecord& a, const AnnotationRecord& b) {
                  return std::tie(a.verbatim_id, a.annotator_id, a.dimension) <
                         std::tie(b.verbatim_id, b.annotator_id, b.dimension);
              });
}

CorpusError::CorpusError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

// --- loading --------------------------------------------------------------

namespace {

std::string required_string(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw CorpusError(line, std::string("missing field \"") + key + "\"");
    if (!it->is_string()) throw CorpusError(line, std::string("field \"") + key + "\" must be a string");
    return it->get<std::string>();
}

struct PendingRef {
    std::size_t line;
    std::string what;
    std::string id;
};

}  // namespace

Corpus load_corpus(std::istream& in) {
    Corpus corpus;
    std::unordered_map<std::string, std::size_t> project_lines, post_lines, verbatim_lines;
    std::set<std::tuple<std::string, std::string, Dimension>> seen_records;
    std::vector<std::size_t> record_lines;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw CorpusError(line_no, std::string("malformed JSON: ") + e.what());
        }
        if (!obj.is_object()) throw CorpusError(line_no, "expected a JSON object");
        const std::string kind = required_string(obj, "kind", line_no);

        if (kind == "project") {
            Project p{required_string(obj, "id", line_no), required_string(obj, "name", line_no)};
            if (!project_lines.emplace(p.id, line_no).second)
                throw CorpusError(line_no, "duplicate project id \"" + p.id + "\"");
            corpus.projects.push_back(std::move(p));
        } else if (kind == "post") {
            Post p{required_string(obj, "id", line_no), required_string(obj, "project_id", line_no),
                   required_string(obj, "participant_id", line_no)};
            if (!post_lines.emplace(p.id, line_no).second)
                throw CorpusError(line_no, "duplicate post id \"" + p.id + "\"");
            corpus.posts.push_back(std::move(p));
        } else if (kind == "verbatim") {
            Verbatim v;
            v.id = required_string(obj, "id", line_no);
            v.post_id = required_string(obj, "post_id", line_no);
            v.project_id = required_string(obj, "project_id", line_no);
            v.text = required_string(obj, "text", line_no);
            auto pos = obj.find("position");
            if (pos == obj.end() || !pos->is_number_integer() || pos->get<long long>() < 0)
                throw CorpusError(line_no, "\"position\" must be a non-negative integer");
            v.position = pos->get<std::uint64_t>();
            if (!verbatim_lines.emplace(v.id, line_no).second)
                throw CorpusError(line_no, "duplicate verbatim id \"" + v.id + "\"");
            corpus.verbatims.push_back(std::move(v));
        } else if (kind == "annotation") {
            AnnotationRecord r;
            r.verbatim_id = required_string(obj, "verbatim_id", line_no);
            r.annotator_id = required_string(obj, "annotator_id", line_no);
            const std::string dim = required_string(obj, "dimension", line_no);
            auto parsed = parse_dimension(dim);
            if (!parsed || dim.size() != 1)
                throw CorpusError(line_no, "unknown dimension \"" + dim + "\"");
            r.dimension = *parsed;
            auto val = obj.find("value");
            if (val == obj.end() || !val->is_number_integer())
                throw CorpusError(line_no, "\"value\" must be one of -1, 0, 1");
            auto value = AnnotationValue::from_int(val->get<long long>());
            if (!value)
                throw CorpusError(line_no, "value " + val->dump() + " outside {-1, 0, 1}");
            r.value = *value;
            if (!seen_records.emplace(r.verbatim_id, r.annotator_id, r.dimension).second)
                throw CorpusError(line_no, "duplicate annotation for (" + r.verbatim_id + ", " +
                                               r.annotator_id + ", " + dim + ")");
            corpus.annotators.insert(r.annotator_id);
            corpus.records.push_back(std::move(r));
            record_lines.push_back(line_no);
        } else {
            throw CorpusError(line_no, "unknown kind \"" + kind + "\"");
        }
    }

    // end-of-stream reference resolution
    for (const Post& p : corpus.posts) {
        if (!project_lines.contains(p.project_id))
            throw CorpusError(post_lines[p.id], "post \"" + p.id + "\" references unknown project \"" +
                                                    p.project_id + "\"");
    }
    for (const Verbatim& v : corpus.verbatims) {
        const std::size_t at = verbatim_lines[v.id];
        if (!project_lines.contains(v.project_id))
            throw CorpusError(at, "verbatim \"" + v.id + "\" references unknown project \"" +
                                      v.project_id + "\"");
        if (!post_lines.contains(v.post_id))
            throw CorpusError(at, "verbatim \"" + v.id + "\" references unknown post \"" + v.post_id + "\"");
    }
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        const auto& r = corpus.records[i];
        if (!verbatim_lines.contains(r.verbatim_id))
            throw CorpusError(record_lines[i], "annotation references unknown verbatim \"" +
                                                   r.verbatim_id + "\"");
    }
    return corpus;
}

Corpus load_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file " + path);
    return load_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& input) {
    Corpus corpus = input;
    canonicalize(corpus);
    for (const auto& p : corpus.projects)
        out << json{{"kind", "project"}, {"id", p.id}, {"name", p.name}}.dump() << '\n';
    for (const auto& p : corpus.posts)
        out << json{{"kind", "post"}, {"id", p.id}, {"project_id", p.project_id},
                    {"participant_id", p.participant_id}}.dump()
            << '\n';
    for (const auto& v : corpus.verbatims)
        out << json{{"kind", "verbatim"}, {"id", v.id},      {"post_id", v.post_id},
                    {"project_id", v.project_id}, {"position", v.position}, {"text", v.text}}
                   .dump()
            << '\n';
    for (const auto& r : corpus.records)
        out << json{{"kind", "annotation"}, {"verbatim_id", r.verbatim_id},
                    {"annotator_id", r.annotator_id},
                    {"dimension", std::string(dimension_code(r.dimension))},
                    {"value", r.value.value()}}
                   .dump()
            << '\n';
}

// --- validation -----------------------------------------------------------

ValidationReport validate(const Corpus& corpus) {
    ValidationReport report;
    auto error = [&](std::string code, std::string message, std::string id) {
        report.push_back({Severity::Error, std::move(code), std::move(message), std::move(id)});
    };
    auto warning = [&](std::string code, std::string message, std::string id) {
        report.push_back({Severity::Warning, std::move(code), std::move(message), std::move(id)});
    };

    std::unordered_set<std::string> projects, verbatims;
    std::unordered_map<std::string, const Post*> posts;
    for (const auto& p : corpus.projects) {
        if (!projects.insert(p.id).second) error("duplicate_id", "duplicate project id", p.id);
    }
    for (const auto& p : corpus.posts) {
        if (!posts.emplace(p.id, &p).second) error("duplicate_id", "duplicate post id", p.id);
        if (!projects.contains(p.project_id))
            error("dangling_reference", "post references unknown project " + p.project_id, p.id);
    }
    for (const auto& v : corpus.verbatims) {
        if (!verbatims.insert(v.id).second) error("duplicate_id", "duplicate verbatim id", v.id);
        if (!projects.contains(v.project_id))
            error("dangling_reference", "verbatim references unknown project " + v.project_id, v.id);
        auto post = posts.find(v.post_id);
        if (post == posts.end()) {
            error("dangling_reference", "verbatim references unknown post " + v.post_id, v.id);
        } else if (post->second->project_id != v.project_id) {
            error("project_mismatch",
                  "verbatim project " + v.project_id + " differs from its post's project " +
                      post->second->project_id,
                  v.id);
        }
        if (v.text.empty()) warning("empty_text", "verbatim text is empty", v.id);
    }

    std::set<std::tuple<std::string_view, std::string_view, Dimension>> triples;
    std::map<std::string_view, std::set<std::string_view>> coders_per_verbatim;
    for (const auto& r : corpus.records) {
        if (!verbatims.contains(r.verbatim_id)) {
            error("dangling_reference", "annotation references unknown verbatim", r.verbatim_id);
            continue;
        }
        if (!corpus.annotators.contains(r.annotator_id))
            error("dangling_reference", "annotation by undeclared annotator " + r.annotator_id,
                  r.verbatim_id);
        if (!triples.emplace(r.verbatim_id, r.annotator_id, r.dimension).second)
            error("duplicate_record",
                  "more than one annotation by " + r.annotator_id + " on dimension " +
                      std::string(dimension_code(r.dimension)),
                  r.verbatim_id);
        coders_per_verbatim[r.verbatim_id].insert(r.annotator_id);
    }

    // coverage relative to the modal annotator count (ties resolved upward)
    std::map<std::size_t, std::size_t> histogram;
    for (const auto& v : corpus.verbatims) {
        auto it = coders_per_verbatim.find(v.id);
        ++histogram[it == coders_per_verbatim.end() ? 0 : it->second.size()];
    }
    std::size_t modal = 0, modal_freq = 0;
    for (auto [count, freq] : histogram) {
        if (freq >= modal_freq) {
            modal = count;
            modal_freq = freq;
        }
    }
    for (const auto& v : corpus.verbatims) {
        auto it = coders_per_verbatim.find(v.id);
        std::size_t n = it == coders_per_verbatim.end() ? 0 : it->second.size();
        if (n < modal)
            warning("incomplete_coverage",
                    "incomplete coverage: " + std::to_string(n) + " of " + std::to_string(modal) +
                        " annotators",
                    v.id);
    }
    return report;
}

bool has_errors(const ValidationReport& report) noexcept {
    return count_severity(report, Severity::Error) > 0;
}

std::size_t count_severity(const ValidationReport& report, Severity severity) noexcept {
    return static_cast<std::size_t>(std::count_if(
        report.begin(), report.end(), [&](const Finding& f) { return f.severity == severity; }));
}

void write_validation_csv(std::ostream& out, const ValidationReport& report) {
    out << "severity,code,entity_id,message\n";
    for (const auto& f : report) {
        out << (f.severity == Severity::Error ? "error" : "warning") << ',' << csv::escape(f.code)
            << ',' << csv::escape(f.entity_id) << ',' << csv::escape(f.message) << '\n';
    }
}

// --- record index ---------------------------------------------------------

RecordIndex::RecordIndex(const Corpus& corpus) {
    for (const auto& r : corpus.records) {
        by_verbatim_[r.verbatim_id][index_of(r.dimension)].push_back({r.annotator_id, r.value});
    }
    for (auto& [id, dims] : by_verbatim_) {
        for (auto& votes : dims) {
            std::sort(votes.begin(), votes.end(),
                      [](const Vote& a, const Vote& b) { return a.annotator_id < b.annotator_id; });
        }
    }
}

const std::vector<RecordIndex::Vote>& RecordIndex::votes(std::string_view verbatim_id,
                                                         Dimension d) const {
    auto it = by_verbatim_.find(verbatim_id);
    if (it == by_verbatim_.end()) return empty_;
    return it->second[index_of(d)];
}

// --- statistics -----------------------------------------------------------

CorpusStats descriptive_stats(const Corpus& corpus) {
    if (corpus.verbatims.empty()) throw std::invalid_argument("no verbatims");

    const RecordIndex index(corpus);
    CorpusStats stats;
    std::size_t negative_pairs = 0;

    // (annotator, project, dimension) -> {judged, positive, negative}
    struct Tally {
        std::size_t judged = 0, positive = 0, negative = 0;
    };
    std::map<std::tuple<std::string, std::string, Dimension>, Tally> groups;

    for (Dimension d : kDimensions) {
        std::size_t any_neg = 0, any_pos = 0, unannotated = 0;
        for (const auto& v : corpus.verbatims) {
            bool neg = false, pos = false;
            for (const auto& vote : index.votes(v.id, d)) {
                auto& t = groups[{std::string(vote.annotator_id), v.project_id, d}];
                ++t.judged;
                if (vote.value.value() > 0) {
                    pos = true;
                    ++t.positive;
                } else if (vote.value.value() < 0) {
                    neg = true;
                    ++t.negative;
                }
            }
            any_neg += neg;
            any_pos += pos;
            unannotated += !(neg || pos);
        }
        negative_pairs += any_neg;
        const double n = static_cast<double>(corpus.verbatims.size());
        stats.per_dimension[index_of(d)] = {d, corpus.verbatims.size(), unannotated / n,
                                            any_neg / n, any_pos / n};
    }
    stats.fraction_negative =
        static_cast<double>(negative_pairs) / (4.0 * static_cast<double>(corpus.verbatims.size()));

    for (const auto& [key, t] : groups) {
        const auto& [annotator, project, d] = key;
        const double n = static_cast<double>(t.judged);
        stats.per_group.push_back({annotator, project, d, t.judged, t.positive / n, t.negative / n});
    }
    return stats;
}

void write_stats_csv(std::ostream& out, const CorpusStats& stats) {
    out << "scope,dimension,annotator_id,project_id,n_verbatims,fraction_unannotated,"
           "fraction_any_negative,fraction_any_positive,proportion_positive,proportion_negative\n";
    for (const auto& s : stats.per_dimension) {
        out << "dimension," << dimension_code(s.dimension) << ",,," << s.verbatims << ','
            << csv::real(s.fraction_unannotated) << ',' << csv::real(s.fraction_any_negative) << ','
            << csv::real(s.fraction_any_positive) << ",,\n";
    }
    for (const auto& g : stats.per_group) {
        out << "group," << dimension_code(g.dimension) << ',' << csv::escape(g.annotator_id) << ','
            << csv::escape(g.project_id) << ',' << g.verbatims << ",,,," << csv::real(g.proportion_positive)
            << ',' << csv::real(g.proportion_negative) << '\n';
    }
    out << "global,,,," << (stats.per_dimension[0].verbatims) << ",," << csv::real(stats.fraction_negative)
        << ",,,\n";
}

}  // namespace appraisal
