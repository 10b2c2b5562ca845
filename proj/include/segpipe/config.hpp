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
#include <string>

namespace segpipe {

/// Settings shared by the command-line tools. Resolution order is
/// flags, then the JSON config file, then these defaults.
struct PipelineConfig {
    std::string data_dir = "data";
    std::string palette;  // empty: the built-in street palette
    std::string checkpoint = "model.segm";
    std::string report_dir;  // empty: reports only where --report says
    std::size_t k = 12;
    std::uint64_t seed = 42;
    double split_ratio = 0.8;
    std::size_t epochs = 100;
    std::size_t batch_size = 2;
    std::optional<double> learning_rate;  // unset: 1e-3 for adam, 1e-2 for sgd
    std::string optimizer = "adam";
    std::size_t num_classes = 12;

    /// Throws ConfigError naming the first out-of-range field.
    void validate() const;

    double effective_learning_rate() const;
};

/// Applies the keys of a JSON object on top of `base`. Unknown keys and type
/// mismatches raise ConfigError naming the key.
PipelineConfig apply_config_json(const std::string& json_text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

/// Fully resolved config as pretty JSON, with the effective learning rate.
std::string config_to_json(const PipelineConfig& config);

}  // namespace segpipe
