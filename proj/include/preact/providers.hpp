#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "preact/orchestrator.hpp"

namespace preact {

// Replays completions from a fixture, in order. The fixture file is JSONL,
// one {"completion": "..."} object per line. Running past the end is a
// transport error ("script exhausted").
class ScriptedLlm : public LlmPort {
public:
    explicit ScriptedLlm(std::vector<std::string> completions);
    static Result<ScriptedLlm, TransportError> from_file(const std::filesystem::path& fixture);

    Result<std::string, TransportError> complete(const LlmRequest& request) override;

    std::size_t calls() const { return next_; }
    const std::vector<LlmRequest>& requests() const { return requests_; }

private:
    std::vector<std::string> completions_;
    std::vector<LlmRequest> requests_;
    std::size_t next_ = 0;
};

// OpenAI-style chat-completion client. `endpoint` is the API base including
// any version prefix (e.g. https://api.example.com/v1); the provider posts to
// <endpoint>/chat/completions. The bearer token is read from the named
// environment variable, never from configuration files.
class HttpLlm : public LlmPort {
public:
    HttpLlm(std::string endpoint, std::string model, std::string auth_env);

    Result<std::string, TransportError> complete(const LlmRequest& request) override;

private:
    std::string endpoint_;
    std::string model_;
    std::string auth_env_;
};

}  // namespace preact
