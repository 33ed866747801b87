// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

// Small helpers shared by the CSV writers.

#ifndef APPRAISAL_SRC_CSV_HPP
#define APPRAISAL_SRC_CSV_HPP

#include <fmt/format.h>

#include <optional>
#include <string>
#include <string_view>

namespace appraisal::csv {

inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string real(double v) { return fmt::format("{:.6f}", v); }

inline std::string real_or_na(const std::optional<double>& v) { return v ? real(*v) : "NA"; }

}  // namespace appraisal::csv

#endif  // APPRAISAL_SRC_CSV_HPP
