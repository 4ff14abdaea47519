#include "preact/text_metrics.hpp"

#include <cctype>
#include <cmath>
#include <map>

namespace preact {

std::vector<std::string> normalize_tokens(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char ch : text) {
        if (std::isalnum(ch)) {
            current.push_back(static_cast<char>(std::tolower(ch)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

namespace {

std::map<std::string, int> term_counts(const std::string& text) {
    std::map<std::string, int> counts;
    for (std::string& tok : normalize_tokens(text)) ++counts[tok];
    return counts;
}

}  // namespace

double token_f1(const std::string& a, const std::string& b) {
    auto ca = term_counts(a);
    auto cb = term_counts(b);
    std::size_t len_a = 0, len_b = 0;
    for (const auto& [_, n] : ca) len_a += n;
    for (const auto& [_, n] : cb) len_b += n;
    if (len_a == 0 && len_b == 0) return 1.0;
    if (len_a == 0 || len_b == 0) return 0.0;

    std::size_t common = 0;
    for (const auto& [tok, n] : ca) {
        auto it = cb.find(tok);
        if (it != cb.end()) common += std::min(n, it->second);
    }
    if (common == 0) return 0.0;
    double precision = static_cast<double>(common) / static_cast<double>(len_a);
    double recall = static_cast<double>(common) / static_cast<double>(len_b);
    return 2.0 * precision * recall / (precision + recall);
}

double TfCosineSimilarity::score(const std::string& a, const std::string& b) {
    auto ca = term_counts(a);
    auto cb = term_counts(b);
    if (ca.empty() && cb.empty()) return 1.0;
    if (ca.empty() || cb.empty()) return 0.0;

    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [tok, n] : ca) {
        na += static_cast<double>(n) * n;
        auto it = cb.find(tok);
        if (it != cb.end()) dot += static_cast<double>(n) * it->second;
    }
    for (const auto& [_, n] : cb) nb += static_cast<double>(n) * n;
    if (dot == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace preact
