// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

// Per-verbatim vote proportions ("soft labels") and their gradient levels.

#ifndef APPRAISAL_AGGREGATE_HPP
#define APPRAISAL_AGGREGATE_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "appraisal/corpus.hpp"

namespace appraisal {

/// Vote counts for one (verbatim, dimension). Proportions are derived from
/// the exact counts, so level identity (k/m) never drifts.
class SoftLabel {
public:
    SoftLabel() = default;
    SoftLabel(std::uint32_t n_neg, std::uint32_t n_zero, std::uint32_t n_pos);

    std::uint32_t n_neg() const noexcept { return n_neg_; }
    std::uint32_t n_zero() const noexcept { return n_zero_; }
    std::uint32_t n_pos() const noexcept { return n_pos_; }
    std::uint32_t m() const noexcept { return n_neg_ + n_zero_ + n_pos_; }

    double p_neg() const noexcept { return ratio(n_neg_); }
    double p_zero() const noexcept { return ratio(n_zero_); }
    double p_pos() const noexcept { return ratio(n_pos_); }

    /// Signed level numerator: mean == level() / m().
    int level() const noexcept { return static_cast<int>(n_pos_) - static_cast<int>(n_neg_); }

    friend bool operator==(const SoftLabel&, const SoftLabel&) = default;

private:
    double ratio(std::uint32_t n) const noexcept {
        return static_cast<double>(n) / static_cast<double>(m());
    }
    std::uint32_t n_neg_ = 0, n_zero_ = 1, n_pos_ = 0;
};

/// p_pos - p_neg.
double mean_value(const SoftLabel& label) noexcept;

using SoftLabelMap = std::map<std::string, SoftLabel>;

/// Verbatims with no record on `dimension` are left out.
SoftLabelMap aggregate(const Corpus& corpus, Dimension dimension);

struct GradientHistogram {
    Dimension dimension = Dimension::Familiarity;
    std::uint32_t m = 0;
    std::vector<std::size_t> counts;  // index k + m holds level k/m, k in [-m, m]

    std::size_t at_level(int k) const { return counts.at(static_cast<std::size_t>(k + static_cast<int>(m))); }
};

class MixedAnnotatorCountError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requires every aggregated verbatim to have the same m; otherwise throws
/// MixedAnnotatorCountError (build per-m sub-histograms instead).
GradientHistogram gradient_histogram(const Corpus& corpus, Dimension dimension);
GradientHistogram gradient_histogram(const SoftLabelMap& labels, Dimension dimension);

/// CSV: verbatim_id,dimension,m,n_neg,n_zero,n_pos,mean
void write_aggregate_csv(std::ostream& out, const Corpus& corpus);

}  // namespace appraisal

#endif  // APPRAISAL_AGGREGATE_HPP
