// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include "appraisal/agreement.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "csv.hpp"

namespace appraisal {

ReliabilityData::ReliabilityData(std::vector<std::string> unit_ids, std::vector<std::string> coder_ids,
                                 std::vector<int> domain)
    : unit_ids_(std::move(unit_ids)),
      coder_ids_(std::move(coder_ids)),
      domain_(std::move(domain)),
      cells_(unit_ids_.size() * coder_ids_.size()) {
    std::sort(domain_.begin(), domain_.end());
    domain_.erase(std::unique(domain_.begin(), domain_.end()), domain_.end());
    if (domain_.empty()) throw std::invalid_argument("empty value domain");
}

void ReliabilityData::set(std::size_t unit, std::size_t coder, std::optional<int> value) {
    if (value && domain_index(*value) < 0)
        throw std::invalid_argument("value " + std::to_string(*value) + " outside the declared domain");
    cells_.at(unit * coders() + coder) = value;
}

std::size_t ReliabilityData::present_cells() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(cells_.begin(), cells_.end(), [](const auto& c) { return c.has_value(); }));
}

int ReliabilityData::domain_index(int value) const noexcept {
    auto it = std::lower_bound(domain_.begin(), domain_.end(), value);
    if (it == domain_.end() || *it != value) return -1;
    return static_cast<int>(it - domain_.begin());
}

std::string_view modality_name(Modality m) noexcept {
    switch (m) {
        case Modality::Global: return "Global";
        case Modality::Polarity: return "Polarity";
        case Modality::Pertinence: return "Pertinence";
    }
    return "?";
}

std::string_view metric_name(DistanceMetric m) noexcept {
    return m == DistanceMetric::Nominal ? "nominal" : "interval";
}

std::optional<DistanceMetric> parse_metric(std::string_view name) noexcept {
    if (name == "nominal") return DistanceMetric::Nominal;
    if (name == "interval") return DistanceMetric::Interval;
    return std::nullopt;
}

CoincidenceMatrix coincidence_matrix(const ReliabilityData& data) {
    const std::size_t k = data.domain().size();
    CoincidenceMatrix cm;
    cm.domain = data.domain();
    cm.o.assign(k, std::vector<double>(k, 0.0));
    cm.marginals.assign(k, 0.0);

    std::vector<std::uint64_t> counts(k);
    for (std::size_t u = 0; u < data.units(); ++u) {
        std::fill(counts.begin(), counts.end(), 0);
        std::size_t m = 0;
        for (std::size_t c = 0; c < data.coders(); ++c) {
            if (const auto& v = data.cell(u, c)) {
                ++counts[static_cast<std::size_t>(data.domain_index(*v))];
                ++m;
            }
        }
        if (m < 2) continue;
        ++cm.units_used;
        // ordered pairs of distinct cells: counts[a]*counts[b] off the
        // diagonal, counts[a]*(counts[a]-1) on it
        auto& pairs = cm.pair_counts[m];
        pairs.resize(k * k, 0);
        for (std::size_t a = 0; a < k; ++a) {
            cm.marginals[a] += static_cast<double>(counts[a]);
            if (counts[a] == 0) continue;
            for (std::size_t b = 0; b < k; ++b)
                pairs[a * k + b] += a == b ? counts[a] * (counts[a] - 1) : counts[a] * counts[b];
        }
    }
    if (cm.units_used == 0) throw InsufficientDataError();

    for (const auto& [m, pairs] : cm.pair_counts) {
        const double w = 1.0 / static_cast<double>(m - 1);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) cm.o[a][b] += static_cast<double>(pairs[a * k + b]) * w;
        }
    }
    for (double n_c : cm.marginals) cm.total += n_c;
    return cm;
}

AlphaResult krippendorff_alpha(const CoincidenceMatrix& cm, DistanceMetric metric) {
    const std::size_t k = cm.domain.size();
    const double n = cm.total;

    // Each partial sum below is a sum of integers, hence exact; only the
    // division by (m - 1) rounds, and it is applied in ascending m.
    double observed = 0.0;
    for (const auto& [m, pairs] : cm.pair_counts) {
        double weighted = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b)
                weighted += static_cast<double>(pairs[a * k + b]) *
                            squared_distance(metric, cm.domain[a], cm.domain[b]);
        }
        observed += weighted / static_cast<double>(m - 1);
    }
    double expected = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b)
            expected += cm.marginals[a] * cm.marginals[b] * squared_distance(metric, cm.domain[a], cm.domain[b]);
    }

    AlphaResult result;
    result.n_units_used = cm.units_used;
    if (expected == 0.0) {
        result.degenerate = true;
        return result;
    }
    // 1 - (observed / n) / (expected / (n (n - 1)))
    result.alpha = 1.0 - (n - 1.0) * observed / expected;
    return result;
}

AlphaResult krippendorff_alpha(const ReliabilityData& data, DistanceMetric metric) {
    return krippendorff_alpha(coincidence_matrix(data), metric);
}

ReliabilityData project_modality(const Corpus& corpus, Dimension dimension, Modality modality) {
    std::vector<std::string> units;
    units.reserve(corpus.verbatims.size());
    for (const auto& v : corpus.verbatims) units.push_back(v.id);
    std::sort(units.begin(), units.end());
    std::vector<std::string> coders(corpus.annotators.begin(), corpus.annotators.end());

    std::vector<int> domain;
    switch (modality) {
        case Modality::Global: domain = {-1, 0, 1}; break;
        case Modality::Polarity: domain = {-1, 1}; break;
        case Modality::Pertinence: domain = {0, 1}; break;
    }
    ReliabilityData data(units, coders, domain);

    std::map<std::string_view, std::size_t> coder_pos;
    for (std::size_t i = 0; i < coders.size(); ++i) coder_pos[data.coder_ids()[i]] = i;

    const RecordIndex index(corpus);
    for (std::size_t u = 0; u < data.units(); ++u) {
        for (const auto& vote : index.votes(data.unit_ids()[u], dimension)) {
            const int v = vote.value.value();
            std::optional<int> cell;
            switch (modality) {
                case Modality::Global: cell = v; break;
                case Modality::Polarity:
                    if (v != 0) cell = v;
                    break;
                case Modality::Pertinence: cell = v != 0 ? 1 : 0; break;
            }
            auto pos = coder_pos.find(vote.annotator_id);
            if (pos != coder_pos.end()) data.set(u, pos->second, cell);
        }
    }
    return data;
}

AgreementReport agreement_report(const Corpus& corpus, DistanceMetric metric) {
    AgreementReport report;
    report.metric = metric;
    for (Dimension d : kDimensions) {
        for (Modality m : kModalities) {
            AgreementCell cell{d, m, std::string{}};
            try {
                cell.outcome = krippendorff_alpha(project_modality(corpus, d, m), metric);
            } catch (const std::exception& e) {
                cell.outcome = std::string(e.what());
            }
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

void write_agreement_csv(std::ostream& out, const AgreementReport& report) {
    out << "dimension,modality,alpha,n_units_used,degenerate,error\n";
    for (const auto& cell : report.cells) {
        out << dimension_code(cell.dimension) << ',' << modality_name(cell.modality) << ',';
        if (const auto* r = std::get_if<AlphaResult>(&cell.outcome)) {
            out << csv::real_or_na(r->value()) << ',' << r->n_units_used << ','
                << (r->degenerate ? "true" : "false") << ",\n";
        } else {
            out << "NA,0,false," << csv::escape(std::get<std::string>(cell.outcome)) << '\n';
        }
    }
}

}  // namespace appraisal
