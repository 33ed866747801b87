// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

// Text representations fed to the probe: a character n-gram hashing
// featurizer, and externally computed embedding tables.

#ifndef APPRAISAL_FEATURES_HPP
#define APPRAISAL_FEATURES_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace appraisal {

/// Sparse vector: strictly increasing indices in [0, dimension()).
class FeatureVector {
public:
    struct Entry {
        std::uint32_t index;
        double value;
        friend bool operator==(const Entry&, const Entry&) = default;
    };

    FeatureVector() = default;
    explicit FeatureVector(std::uint32_t dimension) : dimension_(dimension) {}

    /// Entries may come unsorted and repeated; repeats are summed, zeros dropped.
    /// Throws std::invalid_argument on out-of-range indices or non-finite values.
    FeatureVector(std::uint32_t dimension, std::vector<Entry> entries);

    static FeatureVector dense(std::span<const double> values);

    std::uint32_t dimension() const noexcept { return dimension_; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }

    double norm() const noexcept;
    double at(std::uint32_t index) const noexcept;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

private:
    std::uint32_t dimension_ = 0;
    std::vector<Entry> entries_;
};

using FeatureMap = std::map<std::string, FeatureVector>;

struct FeaturizerConfig {
    std::uint32_t ngram_min = 3;
    std::uint32_t ngram_max = 5;
    std::uint32_t buckets = 1u << 15;  // power of two
    bool signed_hash = true;
    bool lowercase = true;

    /// Throws std::invalid_argument when bounds or bucket count are invalid.
    void check() const;
};

/// Identity of the hash used for n-gram bucketing; stored in model files.
inline constexpr std::string_view kFeaturizerVersion = "fnv1a64-char-ngram/v1";

/// Character n-grams are taken over Unicode code points. Each n-gram's UTF-8
/// bytes are hashed with 64-bit FNV-1a; the low bits pick the bucket and the
/// top bit the sign (when signed). The result is L2-normalized; empty or
/// too-short text gives the zero vector.
FeatureVector hash_featurize(std::string_view text, const FeaturizerConfig& config);

/// The n-grams hash_featurize would hash, in extraction order (after lowercasing).
std::vector<std::string> char_ngrams(std::string_view text, const FeaturizerConfig& config);

/// Lowercases ASCII and Latin-1 capitals; other code points are kept.
std::string fold_case(std::string_view text);

class EmbeddingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EmbeddingTable {
    std::uint32_t dimension = 0;
    std::map<std::string, std::vector<double>> vectors;

    FeatureMap as_features() const;
};

/// JSONL lines {"id": "...", "vec": [..]}. Throws EmbeddingError naming the
/// line and id on dimension mismatch, duplicate ids or non-finite entries.
EmbeddingTable load_embeddings(std::istream& in);
EmbeddingTable load_embeddings_file(const std::string& path);

}  // namespace appraisal

#endif  // APPRAISAL_FEATURES_HPP
