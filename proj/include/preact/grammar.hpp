#pragma once

#include <string>
#include <string_view>

#include "preact/plan.hpp"
#include "preact/result.hpp"

namespace preact {

// Line-oriented plan grammar (all `\n` line endings):
//
//   react completion:
//     Thought: <text>
//     Action: <tool_name>
//     Action Input: <canonical JSON object>
//   or
//     Thought: <text>
//     Final Answer: <text runs to end of input>
//
//   preact completion: one or more blocks
//     Step <k>:
//     Thought: <text>
//     Action: <tool_name>
//     Action Input: <JSON object>
//   terminated by
//     Step <n+1>:
//     Thought: <text>
//     Final Answer: <text runs to end of input>
//
// Steps are numbered contiguously from 1. Trailing whitespace and markdown
// code fences are stripped before parsing.

Result<Plan, ParseError> parse_plan(std::string_view raw, Mode mode);

// Inverse of parse_plan: parse_plan(render_plan(p, m), m) == p for every
// complete plan (react plans must have exactly one step). Throws
// std::invalid_argument when the plan cannot be expressed in the mode.
std::string render_plan(const Plan& plan, Mode mode);

// One executed entry in its prompt serialization:
//   Action: <tool_name>\nAction Input: <object>\nObservation: <payload>\n
std::string render_context_entry(const ExecutionContext::Entry& entry);

// Strips one leading ``` fence line (with optional language tag) and one
// trailing ``` fence line, plus trailing whitespace. Exposed for tests.
std::string strip_completion(std::string_view raw);

}  // namespace preact
