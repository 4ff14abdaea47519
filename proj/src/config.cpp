#include "preact/config.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "preact/providers.hpp"

namespace preact {

Result<Config, ConfigError> Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return ConfigError{"cannot open config file " + path.string()};
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.parent_path());
}

Result<Config, ConfigError> Config::parse(const std::string& yaml_text,
                                          const std::filesystem::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        return ConfigError{std::string("invalid YAML: ") + e.what()};
    }
    Config config;
    if (root["providers"]) {
        if (!root["providers"].IsMap()) return ConfigError{"'providers' must be a map"};
        for (auto it : root["providers"]) {
            std::string id = it.first.as<std::string>();
            const YAML::Node& node = it.second;
            ProviderConfig p;
            std::string kind = node["kind"] ? node["kind"].as<std::string>() : "";
            if (kind == "http") {
                p.kind = ProviderConfig::Kind::Http;
                if (!node["endpoint"]) return ConfigError{"provider '" + id + "': http needs 'endpoint'"};
                p.endpoint = node["endpoint"].as<std::string>();
                if (node["model"]) p.model = node["model"].as<std::string>();
                if (node["auth_env"]) p.auth_env = node["auth_env"].as<std::string>();
            } else if (kind == "scripted") {
                p.kind = ProviderConfig::Kind::Scripted;
                if (!node["fixture"]) return ConfigError{"provider '" + id + "': scripted needs 'fixture'"};
                std::filesystem::path fixture = node["fixture"].as<std::string>();
                p.fixture = fixture.is_absolute() || base_dir.empty() ? fixture : base_dir / fixture;
            } else {
                return ConfigError{"provider '" + id + "': kind must be http or scripted"};
            }
            config.providers.emplace(std::move(id), std::move(p));
        }
    }
    if (root["defaults"]) {
        const YAML::Node& d = root["defaults"];
        if (d["mode"]) {
            auto mode = mode_from_name(d["mode"].as<std::string>());
            if (!mode) return ConfigError{"defaults.mode must be react or preact"};
            config.defaults.mode = *mode;
        }
        if (d["max_iterations"]) config.defaults.max_iterations = d["max_iterations"].as<int>();
        if (d["temperature"]) config.defaults.temperature = d["temperature"].as<double>();
        if (d["n_runs"]) config.defaults.n_runs = d["n_runs"].as<int>();
    }
    return config;
}

const ProviderConfig* Config::find_provider(const std::string& id) const {
    auto it = providers.find(id);
    return it == providers.end() ? nullptr : &it->second;
}

Result<PortFactory, ConfigError> Config::provider_factory(const std::string& id) const {
    const ProviderConfig* p = find_provider(id);
    if (!p) return ConfigError{"unknown provider '" + id + "'"};
    if (p->kind == ProviderConfig::Kind::Scripted) {
        std::filesystem::path fixture = p->fixture;
        return PortFactory{[fixture]() -> std::unique_ptr<LlmPort> {
            auto scripted = ScriptedLlm::from_file(fixture);
            if (!scripted) {
                // Surface the load failure through the port contract.
                struct Failing : LlmPort {
                    TransportError error;
                    Result<std::string, TransportError> complete(const LlmRequest&) override {
                        return error;
                    }
                };
                auto failing = std::make_unique<Failing>();
                failing->error = scripted.error();
                return failing;
            }
            return std::make_unique<ScriptedLlm>(std::move(scripted.value()));
        }};
    }
    std::string endpoint = p->endpoint, model = p->model, auth_env = p->auth_env;
    return PortFactory{[endpoint, model, auth_env]() -> std::unique_ptr<LlmPort> {
        return std::make_unique<HttpLlm>(endpoint, model, auth_env);
    }};
}

}  // namespace preact
