// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include "appraisal/aggregate.hpp"

#include <ostream>

#include "csv.hpp"

namespace appraisal {

SoftLabel::SoftLabel(std::uint32_t n_neg, std::uint32_t n_zero, std::uint32_t n_pos)
    : n_neg_(n_neg), n_zero_(n_zero), n_pos_(n_pos) {
    if (m() == 0) throw std::invalid_argument("soft label needs at least one vote");
}

double mean_value(const SoftLabel& label) noexcept {
    return static_cast<double>(label.level()) / static_cast<double>(label.m());
}

SoftLabelMap aggregate(const Corpus& corpus, Dimension dimension) {
    const RecordIndex index(corpus);
    SoftLabelMap out;
    for (const auto& v : corpus.verbatims) {
        const auto& votes = index.votes(v.id, dimension);
        if (votes.empty()) continue;
        std::uint32_t neg = 0, zero = 0, pos = 0;
        for (const auto& vote : votes) {
            switch (vote.value.value()) {
                case -1: ++neg; break;
                case 0: ++zero; break;
                default: ++pos; break;
            }
        }
        out.emplace(v.id, SoftLabel(neg, zero, pos));
    }
    return out;
}

GradientHistogram gradient_histogram(const SoftLabelMap& labels, Dimension dimension) {
    GradientHistogram h;
    h.dimension = dimension;
    for (const auto& [id, label] : labels) {
        if (h.m == 0) {
            h.m = label.m();
            h.counts.assign(2 * h.m + 1, 0);
        } else if (label.m() != h.m) {
            throw MixedAnnotatorCountError(
                "verbatims have different annotator counts (" + std::to_string(h.m) + " and " +
                std::to_string(label.m()) + "); build one histogram per annotator count");
        }
        ++h.counts[static_cast<std::size_t>(label.level() + static_cast<int>(h.m))];
    }
    return h;
}

GradientHistogram gradient_histogram(const Corpus& corpus, Dimension dimension) {
    return gradient_histogram(aggregate(corpus, dimension), dimension);
}

void write_aggregate_csv(std::ostream& out, const Corpus& corpus) {
    out << "verbatim_id,dimension,m,n_neg,n_zero,n_pos,mean\n";
    for (Dimension d : kDimensions) {
        for (const auto& [id, label] : aggregate(corpus, d)) {
            out << csv::escape(id) << ',' << dimension_code(d) << ',' << label.m() << ','
                << label.n_neg() << ',' << label.n_zero() << ',' << label.n_pos() << ','
                << csv::real(mean_value(label)) << '\n';
        }
    }
}

}  // namespace appraisal
