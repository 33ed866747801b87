// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include "appraisal/features.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>

#include "appraisal/random.hpp"

namespace appraisal {

FeatureVector::FeatureVector(std::uint32_t dimension, std::vector<Entry> entries) : dimension_(dimension) {
    for (const auto& e : entries) {
        if (e.index >= dimension) throw std::invalid_argument("feature index out of range");
        if (!std::isfinite(e.value)) throw std::invalid_argument("non-finite feature value");
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.index < b.index; });
    for (const auto& e : entries) {
        if (!entries_.empty() && entries_.back().index == e.index)
            entries_.back().value += e.value;
        else
            entries_.push_back(e);
    }
    std::erase_if(entries_, [](const Entry& e) { return e.value == 0.0; });
}

FeatureVector FeatureVector::dense(std::span<const double> values) {
    std::vector<Entry> entries;
    entries.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        entries.push_back({static_cast<std::uint32_t>(i), values[i]});
    return FeatureVector(static_cast<std::uint32_t>(values.size()), std::move(entries));
}

double FeatureVector::norm() const noexcept {
    double sq = 0.0;
    for (const auto& e : entries_) sq += e.value * e.value;
    return std::sqrt(sq);
}

double FeatureVector::at(std::uint32_t index) const noexcept {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                               [](const Entry& e, std::uint32_t i) { return e.index < i; });
    return it != entries_.end() && it->index == index ? it->value : 0.0;
}

void FeaturizerConfig::check() const {
    if (ngram_min < 1 || ngram_min > ngram_max)
        throw std::invalid_argument("n-gram bounds must satisfy 1 <= min <= max");
    if (buckets < 2 || !std::has_single_bit(buckets))
        throw std::invalid_argument("bucket count must be a power of two >= 2");
}

namespace {

// Splits UTF-8 into code point byte spans. A malformed byte is its own span.
std::vector<std::string_view> split_code_points(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t len = 1;
        if (lead >= 0xF0 && lead < 0xF8) len = 4;
        else if (lead >= 0xE0) len = lead < 0xF0 ? 3 : 1;
        else if (lead >= 0xC0) len = 2;
        if (i + len > text.size()) len = 1;
        for (std::size_t k = 1; k < len; ++k) {
            if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
                len = 1;
                break;
            }
        }
        out.push_back(text.substr(i, len));
        i += len;
    }
    return out;
}

}  // namespace

std::string fold_case(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::string_view cp : split_code_points(text)) {
        if (cp.size() == 1 && cp[0] >= 'A' && cp[0] <= 'Z') {
            out += static_cast<char>(cp[0] - 'A' + 'a');
        } else if (cp.size() == 2 && static_cast<unsigned char>(cp[0]) == 0xC3) {
            // U+00C0..U+00DE map to U+00E0..U+00FE, except U+00D7 (multiplication sign)
            const auto trail = static_cast<unsigned char>(cp[1]);
            if (trail >= 0x80 && trail <= 0x9E && trail != 0x97) {
                out += cp[0];
                out += static_cast<char>(trail + 0x20);
            } else {
                out += cp;
            }
        } else {
            out += cp;
        }
    }
    return out;
}

std::vector<std::string> char_ngrams(std::string_view text, const FeaturizerConfig& config) {
    config.check();
    const std::string folded = config.lowercase ? fold_case(text) : std::string(text);
    const auto cps = split_code_points(folded);
    std::vector<std::string> grams;
    for (std::size_t start = 0; start < cps.size(); ++start) {
        std::string gram;
        for (std::size_t n = 1; n <= config.ngram_max && start + n <= cps.size(); ++n) {
            gram += cps[start + n - 1];
            if (n >= config.ngram_min) grams.push_back(gram);
        }
    }
    return grams;
}

FeatureVector hash_featurize(std::string_view text, const FeaturizerConfig& config) {
    const auto grams = char_ngrams(text, config);
    const std::uint64_t mask = config.buckets - 1;
    std::vector<FeatureVector::Entry> entries;
    entries.reserve(grams.size());
    for (const auto& g : grams) {
        const std::uint64_t h = fnv1a64(g);
        const double sign = config.signed_hash && (h >> 63) != 0 ? -1.0 : 1.0;
        entries.push_back({static_cast<std::uint32_t>(h & mask), sign});
    }
    FeatureVector v(config.buckets, std::move(entries));
    const double norm = v.norm();
    if (norm == 0.0) return FeatureVector(config.buckets);
    std::vector<FeatureVector::Entry> scaled = v.entries();
    for (auto& e : scaled) e.value /= norm;
    return FeatureVector(config.buckets, std::move(scaled));
}

FeatureMap EmbeddingTable::as_features() const {
    FeatureMap out;
    for (const auto& [id, vec] : vectors) out.emplace(id, FeatureVector::dense(vec));
    return out;
}

EmbeddingTable load_embeddings(std::istream& in) {
    using nlohmann::json;
    EmbeddingTable table;
    bool have_dimension = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw EmbeddingError(where + "malformed JSON: " + e.what());
        }
        if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() || !obj.contains("vec") ||
            !obj["vec"].is_array())
            throw EmbeddingError(where + "expected {\"id\": string, \"vec\": [numbers]}");
        const std::string id = obj["id"].get<std::string>();
        std::vector<double> vec;
        vec.reserve(obj["vec"].size());
        for (const auto& x : obj["vec"]) {
            if (!x.is_number()) throw EmbeddingError(where + "non-numeric entry in vector for id \"" + id + "\"");
            const double v = x.get<double>();
            if (!std::isfinite(v)) throw EmbeddingError(where + "non-finite entry in vector for id \"" + id + "\"");
            vec.push_back(v);
        }
        if (!have_dimension) {
            if (vec.empty()) throw EmbeddingError(where + "empty vector for id \"" + id + "\"");
            table.dimension = static_cast<std::uint32_t>(vec.size());
            have_dimension = true;
        } else if (vec.size() != table.dimension) {
            throw EmbeddingError(where + "dimension mismatch for id \"" + id + "\": expected " +
                                 std::to_string(table.dimension) + ", got " + std::to_string(vec.size()));
        }
        if (!table.vectors.emplace(id, std::move(vec)).second)
            throw EmbeddingError(where + "duplicate id \"" + id + "\"");
    }
    return table;
}

EmbeddingTable load_embeddings_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EmbeddingError("cannot open embeddings file " + path);
    return load_embeddings(in);
}

}  // namespace appraisal
