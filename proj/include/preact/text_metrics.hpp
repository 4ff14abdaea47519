#pragma once

#include <string>
#include <vector>

namespace preact {

// Lowercases, maps punctuation to spaces, splits on whitespace.
std::vector<std::string> normalize_tokens(const std::string& text);

// SQuAD-style token F1 over multisets of normalized tokens.
// Both empty -> 1.0; exactly one empty -> 0.0.
double token_f1(const std::string& a, const std::string& b);

// Text similarity in [0,1]: sim(x,x)=1, symmetric, 0 on disjoint token sets.
class SimilarityPort {
public:
    virtual ~SimilarityPort() = default;
    virtual double score(const std::string& a, const std::string& b) = 0;
};

// Built-in fallback: cosine over term-frequency vectors of normalized tokens.
// Keeps the evaluation suite runnable without an embedding service.
class TfCosineSimilarity : public SimilarityPort {
public:
    double score(const std::string& a, const std::string& b) override;
};

}  // namespace preact
