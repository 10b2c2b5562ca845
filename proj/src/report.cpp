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

#include "segpipe/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "segpipe/errors.hpp"
#include "segpipe/image.hpp"
#include "segpipe/palette.hpp"

namespace segpipe {

namespace {

std::string fixed4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line_no) {
    T v{};
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw DataError("report line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
    return v;
}

double parse_double(const std::string& s, std::size_t line_no) { return parse_number<double>(s, line_no); }

}  // namespace

std::optional<double> Report::summary_value(std::string_view key) const {
    for (const auto& [k, v] : summary) {
        if (k == key) return v;
    }
    return std::nullopt;
}

Report make_report(const IouReport& iou, const ConfusionCounts& counts, std::optional<FpsResult> fps,
                   std::optional<std::size_t> param_count, std::span<const std::string> class_names) {
    if (iou.per_class.size() != counts.num_classes) throw DataError("report: IOU and counts disagree on class count");
    if (!class_names.empty() && class_names.size() != counts.num_classes) {
        throw DataError("report: expected " + std::to_string(counts.num_classes) + " class names");
    }
    Report r;
    for (std::size_t c = 0; c < counts.num_classes; ++c) {
        ReportRow row;
        row.class_index = c;
        row.name = display_class_name(c);
        if (!class_names.empty()) row.name += " (" + class_names[c] + ")";
        row.tp = counts.tp[c];
        row.fp = counts.fp[c];
        row.fn = counts.fn[c];
        row.iou = iou.per_class[c];
        r.rows.push_back(std::move(row));
    }
    r.summary.emplace_back("mean_iou", iou.mean_iou);
    r.summary.emplace_back("fps", fps ? std::optional<double>(fps->fps) : std::nullopt);
    r.summary.emplace_back("param_millions", param_count ? std::optional<double>(*param_count / 1e6) : std::nullopt);
    return r;
}

ReportFormat parse_report_format(std::string_view name) {
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    throw ConfigError("unknown report format '" + std::string(name) + "' (expected csv or json)");
}

ReportFormat report_format_for(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    if (ext == ".csv") return ReportFormat::csv;
    if (ext == ".json") return ReportFormat::json;
    throw ConfigError("cannot infer report format from '" + path.string() + "' (use .csv or .json)");
}

std::string format_report_csv(const Report& report) {
    std::string out = "class,name,tp,fp,fn,iou\n";
    for (const auto& row : report.rows) {
        out += std::to_string(row.class_index) + "," + row.name + "," + std::to_string(row.tp) + "," +
               std::to_string(row.fp) + "," + std::to_string(row.fn) + "," + (row.iou ? fixed4(*row.iou) : "absent") +
               "\n";
    }
    for (const auto& [key, value] : report.summary) {
        out += key + ",,,,," + (value ? fixed4(*value) : "n/a") + "\n";
    }
    return out;
}

std::string format_report_json(const Report& report) {
    nlohmann::ordered_json j;
    j["classes"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        nlohmann::ordered_json c;
        c["class"] = row.class_index;
        c["name"] = row.name;
        c["tp"] = row.tp;
        c["fp"] = row.fp;
        c["fn"] = row.fn;
        c["iou"] = row.iou ? nlohmann::ordered_json(round4(*row.iou)) : nlohmann::ordered_json(nullptr);
        j["classes"].push_back(std::move(c));
    }
    for (const auto& [key, value] : report.summary) {
        j[key] = value ? nlohmann::ordered_json(round4(*value)) : nlohmann::ordered_json(nullptr);
    }
    return j.dump(2) + "\n";
}

Report parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line) || line != "class,name,tp,fp,fn,iou") {
        throw DataError("report: missing header class,name,tp,fp,fn,iou");
    }
    ++line_no;
    Report r;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 6) throw DataError("report line " + std::to_string(line_no) + ": expected 6 fields");
        if (f[1].empty()) {
            std::optional<double> v;
            if (f[5] != "n/a") v = parse_double(f[5], line_no);
            r.summary.emplace_back(f[0], v);
            continue;
        }
        ReportRow row;
        row.class_index = parse_number<std::size_t>(f[0], line_no);
        row.name = f[1];
        row.tp = parse_number<std::uint64_t>(f[2], line_no);
        row.fp = parse_number<std::uint64_t>(f[3], line_no);
        row.fn = parse_number<std::uint64_t>(f[4], line_no);
        if (f[5] != "absent") row.iou = parse_double(f[5], line_no);
        r.rows.push_back(std::move(row));
    }
    return r;
}

void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format) {
    const std::string text = format == ReportFormat::csv ? format_report_csv(report) : format_report_json(report);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string format_report_table(const Report& report) {
    std::size_t name_w = 4;
    for (const auto& row : report.rows) name_w = std::max(name_w, row.name.size());
    for (const auto& s : report.summary) name_w = std::max(name_w, s.first.size());

    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s %10s %10s %10s %8s\n", static_cast<int>(name_w), "name", "tp", "fp", "fn",
                  "iou");
    out += buf;
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof buf, "%-*s %10llu %10llu %10llu %8s\n", static_cast<int>(name_w), row.name.c_str(),
                      static_cast<unsigned long long>(row.tp), static_cast<unsigned long long>(row.fp),
                      static_cast<unsigned long long>(row.fn), row.iou ? fixed4(*row.iou).c_str() : "absent");
        out += buf;
    }
    for (const auto& [key, value] : report.summary) {
        std::snprintf(buf, sizeof buf, "%-*s %10s %10s %10s %8s\n", static_cast<int>(name_w), key.c_str(), "", "", "",
                      value ? fixed4(*value).c_str() : "n/a");
        out += buf;
    }
    return out;
}

std::string format_audit_csv(std::span<const PrintedIouCheck> rows) {
    std::string out = "class,name,tp,fp,fn,iou_computed,iou_printed,consistent\n";
    for (const auto& r : rows) {
        out += std::to_string(r.class_index) + "," + display_class_name(r.class_index) + "," + std::to_string(r.tp) +
               "," + std::to_string(r.fp) + "," + std::to_string(r.fn) + "," +
               (r.computed ? fixed4(*r.computed) : "absent") + "," + fixed4(r.printed) + "," +
               (r.consistent ? "yes" : "no") + "\n";
    }
    return out;
}

}  // namespace segpipe
