#include "preact/providers.hpp"

#include <cstdlib>
#include <fstream>

#include <httplib.h>

namespace preact {

ScriptedLlm::ScriptedLlm(std::vector<std::string> completions)
    : completions_(std::move(completions)) {}

Result<ScriptedLlm, TransportError> ScriptedLlm::from_file(const std::filesystem::path& fixture) {
    std::ifstream in(fixture);
    if (!in) return TransportError{"cannot open scripted fixture: " + fixture.string()};
    std::vector<std::string> completions;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object() || !record.contains("completion") ||
            !record["completion"].is_string()) {
            return TransportError{fixture.string() + ":" + std::to_string(line_no) +
                                  ": expected {\"completion\": \"...\"}"};
        }
        completions.push_back(record["completion"].get<std::string>());
    }
    return ScriptedLlm(std::move(completions));
}

Result<std::string, TransportError> ScriptedLlm::complete(const LlmRequest& request) {
    requests_.push_back(request);
    if (next_ >= completions_.size()) {
        return TransportError{"script exhausted after " + std::to_string(next_) + " completions"};
    }
    return completions_[next_++];
}

HttpLlm::HttpLlm(std::string endpoint, std::string model, std::string auth_env)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), auth_env_(std::move(auth_env)) {}

Result<std::string, TransportError> HttpLlm::complete(const LlmRequest& request) {
    // Split the endpoint into origin + base path for httplib.
    std::string origin = endpoint_;
    std::string base_path;
    std::size_t scheme = origin.find("://");
    if (scheme != std::string::npos) {
        std::size_t slash = origin.find('/', scheme + 3);
        if (slash != std::string::npos) {
            base_path = origin.substr(slash);
            origin = origin.substr(0, slash);
        }
    }
    while (!base_path.empty() && base_path.back() == '/') base_path.pop_back();

    json messages = json::array();
    for (const ChatMessage& m : request.messages) {
        messages.push_back(json{{"content", m.text}, {"role", m.role}});
    }
    json body{{"messages", messages},
              {"model", request.model.empty() ? model_ : request.model},
              {"temperature", request.temperature}};

    httplib::Client client(origin);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!auth_env_.empty()) {
        const char* token = std::getenv(auth_env_.c_str());
        if (!token) return TransportError{"environment variable " + auth_env_ + " is not set"};
        headers.emplace("Authorization", std::string("Bearer ") + token);
    }

    auto res = client.Post(base_path + "/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res) return TransportError{"request failed: " + httplib::to_string(res.error())};
    if (res->status != 200) {
        return TransportError{"HTTP " + std::to_string(res->status) + ": " + res->body};
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
        !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content")) {
        return TransportError{"malformed chat-completion response"};
    }
    return reply["choices"][0]["message"]["content"].get<std::string>();
}

}  // namespace preact
