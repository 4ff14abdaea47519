#pragma once

#include <string>

#include "preact/plan.hpp"

namespace preact {

// Frozen output-format directives, one per mode. Goldens depend on these
// bytes; do not edit without regenerating the fixtures.
extern const char* const kReactDirective;
extern const char* const kPreactDirective;

// Validates bundle invariants; throws InvalidBundle on violation.
void validate_bundle(const PromptBundle& bundle);

// Deterministic prompt text: instruction, tool catalog, dialogue history,
// context triples, then the mode directive. Appending one context entry
// changes the output only by inserting that entry's triple.
std::string render_prompt(const PromptBundle& bundle);

}  // namespace preact
