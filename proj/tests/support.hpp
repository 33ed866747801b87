// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

// Test-only fixtures and independent oracles. Nothing here calls into the
// code paths it is used to check.

#ifndef APPRAISAL_TESTS_SUPPORT_HPP
#define APPRAISAL_TESTS_SUPPORT_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "appraisal/agreement.hpp"
#include "appraisal/corpus.hpp"

namespace appraisal::testing {

/// Builds small corpora: one project "P1", one post per verbatim.
class CorpusBuilder {
public:
    CorpusBuilder& verbatim(const std::string& id, const std::string& project = "P1", const std::string& text = "t") {
        if (!projects_.contains(project)) {
            projects_.insert(project);
            corpus_.projects.push_back({project, "Project " + project});
        }
        corpus_.posts.push_back({"post-" + id, project, "u-" + id});
        corpus_.verbatims.push_back({id, project, "post-" + id, text, 0});
        return *this;
    }

    CorpusBuilder& vote(const std::string& verbatim, const std::string& annotator, Dimension d, int value) {
        corpus_.annotators.insert(annotator);
        corpus_.records.push_back({verbatim, annotator, d, AnnotationValue(value)});
        return *this;
    }

    /// values[j] is annotator "A<j>"'s vote; nullopt leaves the cell empty.
    CorpusBuilder& votes(const std::string& verbatim, Dimension d, const std::vector<std::optional<int>>& values) {
        for (std::size_t j = 0; j < values.size(); ++j) {
            if (values[j]) vote(verbatim, "A" + std::to_string(j), d, *values[j]);
        }
        return *this;
    }

    Corpus build() const { return corpus_; }

private:
    Corpus corpus_;
    std::set<std::string> projects_;
};

inline std::string to_jsonl(const Corpus& corpus) {
    std::ostringstream out;
    write_corpus(out, corpus);
    return out.str();
}

/// Krippendorff's alpha by direct enumeration: every ordered pair of distinct
/// cells within each pairable unit for the observed term, and a marginal
/// product sum over value frequencies for the expected term.
inline std::optional<double> brute_force_alpha(const std::vector<std::vector<std::optional<int>>>& table,
                                               bool interval) {
    auto d2 = [&](int a, int b) { return interval ? double(a - b) * double(a - b) : (a == b ? 0.0 : 1.0); };
    double observed = 0.0;
    double n = 0.0;
    std::map<int, double> freq;
    for (const auto& row : table) {
        std::vector<int> present;
        for (const auto& c : row) {
            if (c) present.push_back(*c);
        }
        if (present.size() < 2) continue;
        const double m = static_cast<double>(present.size());
        for (std::size_t i = 0; i < present.size(); ++i) {
            for (std::size_t j = 0; j < present.size(); ++j) {
                if (i != j) observed += d2(present[i], present[j]) / (m - 1.0);
            }
            freq[present[i]] += 1.0;
        }
        n += m;
    }
    if (n == 0.0) return std::nullopt;
    double expected = 0.0;
    for (const auto& [c, nc] : freq) {
        for (const auto& [k, nk] : freq) expected += nc * nk * d2(c, k);
    }
    const double d_o = observed / n;
    const double d_e = expected / (n * (n - 1.0));
    if (d_e == 0.0) return std::nullopt;
    return 1.0 - d_o / d_e;
}

inline ReliabilityData to_reliability(const std::vector<std::vector<std::optional<int>>>& table,
                                      std::vector<int> domain) {
    std::vector<std::string> units, coders;
    for (std::size_t u = 0; u < table.size(); ++u) units.push_back("u" + std::to_string(u));
    const std::size_t n_coders = table.empty() ? 0 : table[0].size();
    for (std::size_t c = 0; c < n_coders; ++c) coders.push_back("c" + std::to_string(c));
    ReliabilityData data(units, coders, std::move(domain));
    for (std::size_t u = 0; u < table.size(); ++u) {
        for (std::size_t c = 0; c < n_coders; ++c) data.set(u, c, table[u][c]);
    }
    return data;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("appraisal-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace appraisal::testing

#endif  // APPRAISAL_TESTS_SUPPORT_HPP
