#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "preact/plan.hpp"

namespace preact {

// One JSONL object per event: {iteration, kind, payload, turn}.
// kind is one of prompt|completion|tool_call|observation|final_answer.
struct TranscriptEvent {
    std::string kind;
    int turn = 1;
    int iteration = 1;
    json payload;

    json to_json() const;
};

// Collects events in order; can stream them to a sink as they arrive.
class TranscriptWriter {
public:
    TranscriptWriter() = default;
    explicit TranscriptWriter(std::ostream* sink) : sink_(sink) {}

    void record(TranscriptEvent event);

    const std::vector<TranscriptEvent>& events() const { return events_; }
    std::string to_jsonl() const;

private:
    std::vector<TranscriptEvent> events_;
    std::ostream* sink_ = nullptr;
};

}  // namespace preact
