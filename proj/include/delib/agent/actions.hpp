#pragma once

#include <string>
#include <string_view>

#include "delib/core/types.hpp"

namespace delib::agent {

// Renders an action as utterance text carrying the answer markers that
// extract_action parses. Abstentions render as marker-free text.
std::string render_action(const core::Action& action);

// Definitive: the text after the last "ANSWER:" marker on its line, normalized;
// everything before the marker becomes the argument. Prioritized: normalized
// "POLICY:" lines, deduplicated, order preserved. No markers means abstention.
core::Action extract_action(std::string_view text, core::ProblemKind kind);

}  // namespace delib::agent
