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

#include "segpipe/config.hpp"

#include <nlohmann/json.hpp>

#include "segpipe/errors.hpp"
#include "segpipe/image.hpp"
#include "segpipe/optim.hpp"

namespace segpipe {

using nlohmann::json;

void PipelineConfig::validate() const {
    if (k < 1 || k > 256) throw ConfigError("k must lie in [1, 256], got " + std::to_string(k));
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split_ratio must lie in (0, 1)");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (num_classes < 2 || num_classes > 256) throw ConfigError("num_classes must lie in [2, 256]");
    if (learning_rate && !(*learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (optimizer != "adam" && optimizer != "sgd") throw ConfigError("optimizer must be adam or sgd, got '" + optimizer + "'");
    optim::parse_kind(optimizer);
}

double PipelineConfig::effective_learning_rate() const {
    if (learning_rate) return *learning_rate;
    return optim::parse_kind(optimizer) == optim::Kind::adam ? 1e-3 : 1e-2;
}

namespace {

void need(bool ok, const std::string& key, const char* expected) {
    if (!ok) throw ConfigError("config key '" + key + "' must be " + expected);
}

std::string get_string(const json& v, const std::string& key) {
    need(v.is_string(), key, "a string");
    return v.get<std::string>();
}

std::uint64_t get_unsigned(const json& v, const std::string& key) {
    need(v.is_number_unsigned(), key, "a non-negative integer");
    return v.get<std::uint64_t>();
}

double get_number(const json& v, const std::string& key) {
    need(v.is_number(), key, "a number");
    return v.get<double>();
}

}  // namespace

PipelineConfig apply_config_json(const std::string& json_text, PipelineConfig base) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    PipelineConfig c = std::move(base);
    for (const auto& [key, v] : j.items()) {
        if (key == "data_dir") {
            c.data_dir = get_string(v, key);
        } else if (key == "palette") {
            c.palette = get_string(v, key);
        } else if (key == "checkpoint") {
            c.checkpoint = get_string(v, key);
        } else if (key == "report_dir") {
            c.report_dir = get_string(v, key);
        } else if (key == "k") {
            c.k = get_unsigned(v, key);
        } else if (key == "seed") {
            c.seed = get_unsigned(v, key);
        } else if (key == "split_ratio") {
            c.split_ratio = get_number(v, key);
        } else if (key == "epochs") {
            c.epochs = get_unsigned(v, key);
        } else if (key == "batch_size") {
            c.batch_size = get_unsigned(v, key);
        } else if (key == "learning_rate") {
            if (v.is_null()) {
                c.learning_rate.reset();
            } else {
                c.learning_rate = get_number(v, key);
            }
        } else if (key == "optimizer") {
            c.optimizer = get_string(v, key);
        } else if (key == "num_classes") {
            c.num_classes = get_unsigned(v, key);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    try {
        return apply_config_json(std::string(bytes.begin(), bytes.end()), std::move(base));
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string config_to_json(const PipelineConfig& c) {
    nlohmann::ordered_json j;
    j["data_dir"] = c.data_dir;
    j["palette"] = c.palette;
    j["checkpoint"] = c.checkpoint;
    j["report_dir"] = c.report_dir;
    j["k"] = c.k;
    j["seed"] = c.seed;
    j["split_ratio"] = c.split_ratio;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.effective_learning_rate();
    j["optimizer"] = c.optimizer;
    j["num_classes"] = c.num_classes;
    return j.dump(2) + "\n";
}

}  // namespace segpipe
