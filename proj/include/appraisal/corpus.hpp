// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

// Multi-annotator appraisal corpus: data model, JSONL ingestion, validation
// and descriptive statistics.

#ifndef APPRAISAL_CORPUS_HPP
#define APPRAISAL_CORPUS_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace appraisal {

/// The four evaluative dimensions, in canonical report order F, P, U, L.
enum class Dimension : std::uint8_t { Familiarity = 0, Pleasantness = 1, Utility = 2, Legitimacy = 3 };

inline constexpr std::array<Dimension, 4> kDimensions = {
    Dimension::Familiarity, Dimension::Pleasantness, Dimension::Utility, Dimension::Legitimacy};

constexpr std::size_t index_of(Dimension d) noexcept { return static_cast<std::size_t>(d); }

/// Single-letter code used in files: "F", "P", "U", "L".
std::string_view dimension_code(Dimension d) noexcept;
std::string_view dimension_name(Dimension d) noexcept;
std::optional<Dimension> parse_dimension(std::string_view code) noexcept;

/// A judgment in {-1, 0, +1}. Construction from any other integer throws.
class AnnotationValue {
public:
    constexpr AnnotationValue() noexcept = default;
    explicit AnnotationValue(int v);

    static std::optional<AnnotationValue> from_int(long long v) noexcept;

    constexpr int value() const noexcept { return value_; }
    constexpr bool is_zero() const noexcept { return value_ == 0; }

    friend constexpr bool operator==(AnnotationValue, AnnotationValue) noexcept = default;
    friend constexpr auto operator<=>(AnnotationValue, AnnotationValue) noexcept = default;

private:
    int value_ = 0;
};

struct Project {
    std::string id;
    std::string name;
    friend bool operator==(const Project&, const Project&) = default;
};

struct Post {
    std::string id;
    std::string project_id;
    std::string participant_id;
    friend bool operator==(const Post&, const Post&) = default;
};

struct Verbatim {
    std::string id;
    std::string project_id;
    std::string post_id;
    std::string text;
    std::uint64_t position = 0;
    friend bool operator==(const Verbatim&, const Verbatim&) = default;
};

struct AnnotationRecord {
    std::string verbatim_id;
    std::string annotator_id;
    Dimension dimension = Dimension::Familiarity;
    AnnotationValue value;
    friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// Plain aggregate of corpus entities. Treated as immutable once loaded.
struct Corpus {
    std::vector<Project> projects;
    std::vector<Post> posts;
    std::vector<Verbatim> verbatims;
    std::set<std::string> annotators;
    std::vector<AnnotationRecord> records;

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Sorts every entity list by id (records by verbatim, annotator, dimension).
void canonicalize(Corpus& corpus);

/// Raised by load_corpus. line() is 1-based, or 0 for end-of-stream checks.
class CorpusError : public std::runtime_error {
public:
    CorpusError(std::size_t line, const std::string& message);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Reads the line-delimited JSON corpus format. References are resolved
/// once the whole stream has been read, so entity order does not matter.
/// Blank lines are skipped.
Corpus load_corpus(std::istream& in);
Corpus load_corpus_file(const std::string& path);

/// Writes the canonical JSONL form (projects, posts, verbatims, annotations).
void write_corpus(std::ostream& out, const Corpus& corpus);

// --- validation -----------------------------------------------------------

enum class Severity { Warning, Error };

struct Finding {
    Severity severity = Severity::Error;
    std::string code;
    std::string message;
    std::string entity_id;
};

using ValidationReport = std::vector<Finding>;

ValidationReport validate(const Corpus& corpus);

bool has_errors(const ValidationReport& report) noexcept;
std::size_t count_severity(const ValidationReport& report, Severity severity) noexcept;

/// CSV: severity,code,entity_id,message
void write_validation_csv(std::ostream& out, const ValidationReport& report);

// --- record lookup --------------------------------------------------------

/// Records grouped per (verbatim, dimension). Built once, shared read-only by
/// the agreement, aggregation and statistics code.
class RecordIndex {
public:
    struct Vote {
        std::string_view annotator_id;
        AnnotationValue value;
    };

    explicit RecordIndex(const Corpus& corpus);

    /// Votes for a verbatim on one dimension, ordered by annotator id.
    /// Empty if the verbatim has no records there.
    const std::vector<Vote>& votes(std::string_view verbatim_id, Dimension d) const;

private:
    std::map<std::string, std::array<std::vector<Vote>, 4>, std::less<>> by_verbatim_;
    std::vector<Vote> empty_;
};

// --- descriptive statistics -----------------------------------------------

struct DimensionShares {
    Dimension dimension = Dimension::Familiarity;
    std::size_t verbatims = 0;
    double fraction_unannotated = 0.0;
    double fraction_any_negative = 0.0;
    double fraction_any_positive = 0.0;
};

struct GroupProportions {
    std::string annotator_id;
    std::string project_id;
    Dimension dimension = Dimension::Familiarity;
    std::size_t verbatims = 0;  // verbatims this annotator judged in this project
    double proportion_positive = 0.0;
    double proportion_negative = 0.0;
};

struct CorpusStats {
    std::array<DimensionShares, 4> per_dimension{};
    std::vector<GroupProportions> per_group;  // sorted by (annotator, project, dimension)
    /// Share of (verbatim, dimension) pairs with at least one negative vote.
    double fraction_negative = 0.0;
};

/// Throws std::invalid_argument("no verbatims") on an empty corpus.
CorpusStats descriptive_stats(const Corpus& corpus);

/// CSV: scope,dimension,annotator_id,project_id,n_verbatims,fraction_unannotated,
/// fraction_any_negative,fraction_any_positive,proportion_positive,proportion_negative
void write_stats_csv(std::ostream& out, const CorpusStats& stats);

}  // namespace appraisal

#endif  // APPRAISAL_CORPUS_HPP
