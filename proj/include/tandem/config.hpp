// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "tandem/orchestrator.hpp"
#include "tandem/remote.hpp"

namespace tandem {

struct PlannerSettings {
    std::string backend = "oracle";  ///< "oracle" or "remote"
    std::string transport = "http";  ///< "http" or "replay"
    std::filesystem::path replay;    ///< transcript served by the replay transport
    RemoteConfig remote;
    friend bool operator==(const PlannerSettings&, const PlannerSettings&) = default;
};

struct PathSettings {
    std::filesystem::path policy = "policy.json";
    std::filesystem::path memory = "memory.json";
    std::filesystem::path curve = "curve.csv";
    std::filesystem::path traces = "traces.jsonl";
    std::filesystem::path metrics = "metrics.json";
    std::filesystem::path metrics_csv = "metrics.csv";
    friend bool operator==(const PathSettings&, const PathSettings&) = default;
};

struct AppConfig {
    int task = 1;
    /// Tasks trained together; empty means just `task`.
    std::vector<int> train_tasks;
    RunConfig run;
    PlannerSettings planner;
    PathSettings paths;
    friend bool operator==(const AppConfig&, const AppConfig&) = default;
};

/// Strict: unknown sections or keys and out-of-range values throw ConfigError.
AppConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const AppConfig& cfg);
/// Pretty JSON; config_from_json(parse(render_config(c))) == c.
std::string render_config(const AppConfig& cfg);

/// Applies one "section.key=value" override. The value is read as JSON when
/// it parses, else as a bare string. Throws ConfigError.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Reads the file (empty path: defaults), applies overrides, validates.
/// Throws IoError for an unreadable file, ConfigError otherwise.
AppConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

void validate(const AppConfig& cfg);

// File helpers; all failures throw IoError.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);
/// CorruptDocument when the text is not JSON.
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace tandem
