#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "preact/plan.hpp"
#include "preact/result.hpp"
#include "preact/simulation.hpp"

namespace preact {

struct ProviderConfig {
    enum class Kind { Http, Scripted };
    Kind kind = Kind::Scripted;
    std::string endpoint;  // http: API base, e.g. https://api.example.com/v1
    std::string model;
    std::string auth_env;  // name of the env var holding the bearer token
    std::filesystem::path fixture;  // scripted: JSONL of {"completion": ...}
};

struct ConfigDefaults {
    Mode mode = Mode::React;
    int max_iterations = 8;
    double temperature = 0.0;
    int n_runs = 50;
};

struct ConfigError {
    std::string message;
};

// YAML configuration:
//   providers:
//     demo: {kind: scripted, fixture: completions.jsonl}
//     live: {kind: http, endpoint: https://api.example.com/v1, model: m, auth_env: API_KEY}
//   defaults: {mode: react, max_iterations: 8, temperature: 0, n_runs: 50}
// Credentials are read from the named environment variable, never from the
// file itself. Relative fixture paths resolve against the config file's
// directory.
struct Config {
    std::map<std::string, ProviderConfig> providers;
    ConfigDefaults defaults;

    static Result<Config, ConfigError> load(const std::filesystem::path& path);
    static Result<Config, ConfigError> parse(const std::string& yaml_text,
                                             const std::filesystem::path& base_dir = {});

    const ProviderConfig* find_provider(const std::string& id) const;
    Result<PortFactory, ConfigError> provider_factory(const std::string& id) const;
};

}  // namespace preact
