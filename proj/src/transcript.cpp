#include "preact/transcript.hpp"

namespace preact {

json TranscriptEvent::to_json() const {
    return json{{"iteration", iteration}, {"kind", kind}, {"payload", payload}, {"turn", turn}};
}

void TranscriptWriter::record(TranscriptEvent event) {
    if (sink_) {
        (*sink_) << event.to_json().dump() << '\n';
        sink_->flush();
    }
    events_.push_back(std::move(event));
}

std::string TranscriptWriter::to_jsonl() const {
    std::string out;
    for (const TranscriptEvent& e : events_) {
        out += e.to_json().dump();
        out += '\n';
    }
    return out;
}

}  // namespace preact
