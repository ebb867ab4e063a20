#pragma once
// Iterative answer selection: Latin-square-permuted rounds scored by
// perplexity, then one adjudication call when rounds disagree.
//
// Candidates are addressed by their path index everywhere except inside a
// prompt, where they are "Response 1..n" in presented order.

#include "rethinker/agent_loop.hpp"
#include "rethinker/latin_square.hpp"
#include "rethinker/types.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rethinker {

struct SelectionHistory {
    std::vector<SelectionRecord> records;
    std::set<int> chosen_set;        // path indices chosen in any record
};

struct SelectionOutcome {
    CandidateAnswer winner;
    SelectionHistory history;
    bool bypassed = false;           // one live candidate, no model call
    bool fallback = false;           // adjudication failed; lowest PPL record used
    std::vector<Trajectory> rounds;  // selector trajectories in call order
};

// The text a candidate is presented with: its final critic message.
std::string candidate_display_text(const CandidateAnswer& candidate);

// Fills the selector template with `presented` in the given order. With
// `history_text` the re-selection variant is used. Throws SelectionError on
// an empty list.
std::string render_selector_prompt(std::string_view query, const std::vector<const CandidateAnswer*>& presented,
                                   const std::optional<std::string>& history_text);

struct ParsedSelection {
    int presented_position = 0;      // 1-based X from "Response X"
    int original_index = 0;          // perm[X-1]
};

// Last <select>Response X</select> with 1 <= X <= n; X is mapped through
// `perm` (presented position -> 1-based original position). Throws
// SelectionError when nothing parses or X is out of range.
ParsedSelection parse_selection(std::string_view text, int n, const Permutation& perm);

// "Round r: Response i (entropy: p.pppp)" per record, i the original path
// index. Throws std::invalid_argument on empty input.
std::string format_history(const std::vector<SelectionRecord>& records);

// First "confidence" figure in the text, if any (logged only).
std::optional<std::string> parse_verbal_confidence(std::string_view text);

// `square`, when given, must have order equal to the live candidate count.
SelectionOutcome select(const Query& q, const std::vector<CandidateAnswer>& candidates, EngineContext& engine,
                        const LatinSquare* square = nullptr);

// Per-query report: winner, records (round, presented order, chosen,
// perplexity), adjudication flag.
Json selection_report(const Query& q, const std::vector<CandidateAnswer>& candidates,
                      const SelectionOutcome& outcome);

} // namespace rethinker
