// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

// Krippendorff's alpha over a units x coders table, plus the three
// projections of {-1, 0, +1} annotations used in agreement reports.

#ifndef APPRAISAL_AGREEMENT_HPP
#define APPRAISAL_AGREEMENT_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "appraisal/corpus.hpp"

namespace appraisal {

/// Units x coders table with missing cells. Cells are stored row-major.
class ReliabilityData {
public:
    /// `domain` lists the admissible values; it is sorted and deduplicated.
    ReliabilityData(std::vector<std::string> unit_ids, std::vector<std::string> coder_ids,
                    std::vector<int> domain);

    std::size_t units() const noexcept { return unit_ids_.size(); }
    std::size_t coders() const noexcept { return coder_ids_.size(); }
    const std::vector<std::string>& unit_ids() const noexcept { return unit_ids_; }
    const std::vector<std::string>& coder_ids() const noexcept { return coder_ids_; }
    const std::vector<int>& domain() const noexcept { return domain_; }

    const std::optional<int>& cell(std::size_t unit, std::size_t coder) const {
        return cells_.at(unit * coders() + coder);
    }
    /// Throws std::invalid_argument if the value is outside the domain.
    void set(std::size_t unit, std::size_t coder, std::optional<int> value);

    std::size_t present_cells() const noexcept;

    /// Position of `value` in domain(), or -1.
    int domain_index(int value) const noexcept;

private:
    std::vector<std::string> unit_ids_;
    std::vector<std::string> coder_ids_;
    std::vector<int> domain_;
    std::vector<std::optional<int>> cells_;
};

enum class Modality { Global, Polarity, Pertinence };

inline constexpr std::array<Modality, 3> kModalities = {Modality::Global, Modality::Polarity,
                                                        Modality::Pertinence};

std::string_view modality_name(Modality m) noexcept;

enum class DistanceMetric { Nominal, Interval };

std::string_view metric_name(DistanceMetric m) noexcept;
std::optional<DistanceMetric> parse_metric(std::string_view name) noexcept;

/// Squared distance between two domain values.
constexpr double squared_distance(DistanceMetric metric, int c, int k) noexcept {
    if (metric == DistanceMetric::Nominal) return c == k ? 0.0 : 1.0;
    const double diff = static_cast<double>(c - k);
    return diff * diff;
}

/// Pairable-value coincidences. o[c][k] is indexed by domain position.
///
/// Alongside the real-valued matrix, the integer ordered-pair counts are kept
/// per unit size m (pair_counts[m], flattened k x k). Alpha is evaluated from
/// those, so the result does not depend on unit, coder or value order.
struct CoincidenceMatrix {
    std::vector<int> domain;
    std::vector<std::vector<double>> o;
    std::vector<double> marginals;  // integer-valued: pairable occurrences per value
    double total = 0.0;
    std::size_t units_used = 0;
    std::map<std::size_t, std::vector<std::uint64_t>> pair_counts;
};

class InsufficientDataError : public std::runtime_error {
public:
    InsufficientDataError() : std::runtime_error("insufficient paired data") {}
};

/// Throws InsufficientDataError when no unit has two or more present cells.
CoincidenceMatrix coincidence_matrix(const ReliabilityData& data);

struct AlphaResult {
    double alpha = 0.0;  // meaningless when degenerate
    std::size_t n_units_used = 0;
    bool degenerate = false;  // expected disagreement is zero

    std::optional<double> value() const noexcept {
        return degenerate ? std::nullopt : std::optional<double>(alpha);
    }
};

AlphaResult krippendorff_alpha(const ReliabilityData& data, DistanceMetric metric);
AlphaResult krippendorff_alpha(const CoincidenceMatrix& cm, DistanceMetric metric);

/// Units are verbatims, coders are annotators (both in id order).
///   Global:     domain {-1, 0, 1}, values copied
///   Polarity:   domain {-1, 1}, zeros become missing
///   Pertinence: domain {0, 1}, nonzero -> 1
ReliabilityData project_modality(const Corpus& corpus, Dimension dimension, Modality modality);

struct AgreementCell {
    Dimension dimension = Dimension::Familiarity;
    Modality modality = Modality::Global;
    /// Either a result or the error message raised while computing it.
    std::variant<AlphaResult, std::string> outcome;
};

struct AgreementReport {
    DistanceMetric metric = DistanceMetric::Nominal;
    std::vector<AgreementCell> cells;  // dimension-major, canonical order

    const AgreementCell& at(Dimension d, Modality m) const {
        return cells.at(index_of(d) * kModalities.size() + static_cast<std::size_t>(m));
    }
};

AgreementReport agreement_report(const Corpus& corpus, DistanceMetric metric);

/// CSV: dimension,modality,alpha,n_units_used,degenerate. Degenerate or
/// failed cells print NA for alpha; failures carry the message in an extra
/// `error` column.
void write_agreement_csv(std::ostream& out, const AgreementReport& report);

}  // namespace appraisal

#endif  // APPRAISAL_AGREEMENT_HPP
