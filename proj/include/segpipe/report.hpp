// Copyright 2026 The segpipe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segpipe/metrics.hpp"

namespace segpipe {

struct ReportRow {
    std::size_t class_index = 0;  // 0-based, equal to the label value
    std::string name;             // e.g. "Class_01 (sky)"
    std::uint64_t tp = 0, fp = 0, fn = 0;
    std::optional<double> iou;    // unset for absent classes
};

/// Per-class rows followed by summary rows (mean_iou, fps, param_millions).
struct Report {
    std::vector<ReportRow> rows;
    std::vector<std::pair<std::string, std::optional<double>>> summary;

    std::optional<double> summary_value(std::string_view key) const;
};

/// class_names may be empty or hold one entry per class; it is appended to
/// the 1-based display name in parentheses.
Report make_report(const IouReport& iou, const ConfusionCounts& counts, std::optional<FpsResult> fps,
                   std::optional<std::size_t> param_count, std::span<const std::string> class_names = {});

enum class ReportFormat { csv, json };

ReportFormat parse_report_format(std::string_view name);
/// csv for ".csv", json for ".json"; ConfigError otherwise.
ReportFormat report_format_for(const std::filesystem::path& path);

// CSV header `class,name,tp,fp,fn,iou`; summary rows carry their value in
// the iou column. Floats use 4 decimals, missing values print "absent" for
// classes and "n/a" for summaries.
std::string format_report_csv(const Report& report);
std::string format_report_json(const Report& report);
Report parse_report_csv(const std::string& text);

void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format);

/// Aligned plain-text table for terminals.
std::string format_report_table(const Report& report);

/// CSV header `class,name,tp,fp,fn,iou_computed,iou_printed,consistent`.
std::string format_audit_csv(std::span<const PrintedIouCheck> rows);

}  // namespace segpipe
