#pragma once
// Prompt protocol templates. Placeholders are {name}; substitution is a
// single pass, so substituted text is never re-expanded.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rethinker {

inline constexpr const char* kNoAnswerMarker = "[no answer produced last round]";

// Replaces every {key} present in `values`; other braces are left alone.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

// `last_answer` absent means round 0 (no re-answer clause).
std::string render_solver_prompt(std::string_view query, const std::optional<std::string>& last_answer);

std::string render_summary_prompt(std::string_view problem, std::string_view solution);

std::string render_critic_prompt(std::string_view query, std::string_view solution_summary,
                                 const std::optional<std::string>& last_answer);

// `responses` are the already-labelled response blocks; `history` switches to
// the re-selector variant.
std::string render_selector_template(std::string_view query, std::size_t parallel_num, std::string_view responses,
                                     const std::optional<std::string>& history);

std::string render_web_conclusion_prompt(std::string_view user, std::string_view info);

std::string render_seed_init_prompt(const std::vector<std::string>& domains);
std::string render_seed_extraction_prompt(std::string_view original_content);
std::string render_qa_generation_prompt(std::string_view examples, std::string_view seed);

// Judge protocols. The model must end with a "VERDICT: ..." line.
std::string render_judge_prompt(std::string_view question, std::string_view prediction, std::string_view gold);
std::string render_consistency_prompt(std::string_view question, std::string_view reasoning,
                                      std::string_view final_answer);

} // namespace rethinker
