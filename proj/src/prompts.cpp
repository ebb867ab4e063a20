#include "rethinker/prompts.hpp"

namespace rethinker {

namespace {

constexpr std::string_view kToolHelp = R"(There are also several integrated functions that can be used to help you solve the problem. The available functions are:

1. web_search(keywords), this function takes keywords as input, which is a string, and the output is a string containing several web information. This function will call a web search engine to return the search results. This function is especially useful when answering knowledge-based questions.

2. web_parse(link:str, query:str), this function takes the link and query as input, and the output is a string containing the answer to the query according to the content in this link. This function is useful when looking into detail information of a link.)";

constexpr std::string_view kCodeExamples = R"(For example:

1. If you want to use the function of web_search(keywords), will say <code>
keywords=...
results=web_search(keywords)
print(results)
</code> to call the function.

2. If you want to use the function of web_parse(link, query), will say <code>
link=...
query=...
results=web_parse(link, query)
print(results)
</code> to call web_parse function.

3. If you want to do computation, You will write code for accurate result: <code>
a = 123
b = 456
print(a+b)
</code>.)";

constexpr std::string_view kCodeIntro =
    "Every time you write a piece of code between <code> and </code>, the code inside will be executed. For "
    "example, when encountering numerical operations, you might write a piece of code to interpret the math "
    "problem into python code and print the final result in the code. Based on the reasoning process and the "
    "executor feedback, you could write code to help answering the question for multiple times (either for "
    "gaining new information or verifying).";

constexpr std::string_view kWorkflow = R"(Your workflow for solving the problem follow these steps:

- Step 1: First, analyze the question. If it can be answered directly, provide the answer immediately. If information retrieval is required to support the answer, proceed to Step 2 and Step 3.

- Step 2: Web Search & Parse (Verification & Detail): Use `web_search` to find relevant web pages for verification or supplementation. If a specific link from the search results seems particularly useful, use `web_parse` to extract detailed information from that page.

- Step 3: Evaluate and Supplement: After receiving results from 'web_search' or 'web_parse', evaluate them carefully. Treat this information as a supplement to your background knowledge, not as absolute truth. This supplementary context may be incomplete or require further verification.

- You should not be overconfident in your knowledge and reasoning.

- Each time you write code put the code into <code></code> snippet, and the results must be printed out through print function. Please strictly follow Python's indentation rules; do not add any extra indentation to the code. Pause after submitting any code for information retrieval or scientific computation; resume analysis only once the code has finished running.)";

constexpr std::string_view kReanswer = "Last round answer is: {last_round_answer}. Please re-answer it.\n\n";

constexpr std::string_view kSummaryTemplate = R"(You are a premier AI Reasoning Analyst, specializing in deconstructing and evaluating solutions to complex problems.

Your task is to conduct a thorough analysis of the provided "Initial Solution." First, clearly summarize its "Reasoning Trajectory" to map its logical flow. Then, identify critical flaws and key areas for improvement across several dimensions. Note: You are only required to identify and explain the areas for improvement, not to generate a revised solution.

Context:

*   Problem to Solve: {problem}

*   Initial Solution to Analyze: {student_solution}

Your analysis must be structured into the following three parts:

Part 1: Reasoning Trajectory Summary

*   In a clear, concise, and itemized list, summarize the core steps and logical flow the "Initial Solution" took to address the problem. This will serve as a map of its thought process.

Part 2: Final Answer

*   Extract the content between <answer></answer> completely as the final answer; if extraction fails, write null.

Part 3: Key Areas for Improvement

*   Analyze the solution from the following dimensions. For each point, provide specific, actionable feedback on what could be improved.

1. Logical Rigor & Coverage:
    *   Reasoning Chain: Are there any logical leaps, circular arguments, or factual inaccuracies in the reasoning process?
    *   Implicit Assumptions: Does the solution rely on unstated or unverified assumptions that might be flawed?
    *   Edge Cases & Scenarios: Did the solution overlook critical edge cases, boundary conditions, or counter-examples?
    *   Examples: "The argument assumes user input will always be a positive integer, failing to account for negative numbers or zero.", "The conclusion that A causes B lacks a clear, causal link."

2. Knowledge Depth & Breadth:
    *   Domain-Specific Understanding: Is the use and interpretation of key technical terms or domain-specific concepts accurate and sufficiently deep?
    *   Authoritative Sourcing: Could the argument be strengthened by referencing more authoritative, credible, or up-to-date sources?
    *   Multifaceted Perspectives: Could the problem be approached from different angles (e.g., historical, economic, technological) to yield a more comprehensive insight?
    *   Examples: "The analysis of 'disruptive innovation' is superficial and doesn't engage with Christensen's core theory.", "Citing recent academic papers or industry reports would lend more weight to the conclusion."

3. Strategy & Structure:
    *   Problem Decomposition: Could the problem be broken down into smaller, more manageable sub-problems more effectively? Is the current approach to decomposition optimal?
    *   Frameworks & Models: Would applying a formal analytical framework or mental model (e.g., SWOT, First-Principles Thinking, MECE) lead to a more robust or structured answer?
    *   Structural Clarity: Is the overall structure of the answer logical and easy to follow? Do the paragraphs and arguments flow coherently?
    *   Examples: "The solution is presented as a flat list of points; a 'Pyramid Principle' (Thesis-Arguments-Data) structure would be more persuasive.", "A clear, multi-dimensional evaluation rubric is missing when comparing Option A and Option B."

4. Precision in Expression:
    *   Linguistic Ambiguity: Does the solution use vague, ambiguous, or overly subjective language where precision is required?
    *   Clarity of Definitions: Are key concepts defined clearly and used consistently throughout the response?
    *   Examples: "The use of words like 'might' and 'potentially' weakens the argument; it should be replaced with data-backed assertions where possible.", "The definition of 'success' shifts between paragraphs, leading to a confusing argument."

Output Requirements:

*   Strictly adhere to the three-part structure: "Part 1: Reasoning Trajectory Summary" and "Part 2: Final Answer" and "Part 3: Key Areas for Improvement.".

*   In Part 3, use bullet points to clearly list each suggestion for improvement.

*   Your analysis should be objective, constructive, and aimed at elevating the quality of the reasoning.)";

constexpr std::string_view kSelectorHead = R"(You are a diligent and precise judge. You should choose the correct response from the following {PARALLEL_NUM} responses to the problem. To maximize confidence and accuracy, you must rigorously verify each response using tool-based searches (`web_search` and `web_parse`), with a focus on precision and critical evaluation of sources.

The problem is:
{query}

The responses are:
{responses}

)";

constexpr std::string_view kReselect =
    "Based on historical selections and their entropy values, re-perform the selection to improve the "
    "confidence and accuracy of the model's selection.\n{last_selection}\n\n";

constexpr std::string_view kSelectorBody = R"(## Your Task

You should thoroughly analyse each response carefully by writing codes and choose the most correct one from {PARALLEL_NUM} responses. )";

constexpr std::string_view kSelectorProcess = R"(## Your Task Process is as Follows:

### 1. Preliminary Analysis and Search Planning (Plan)

- Analyze the Core of the Problem: First, what is the essence of the problem? Which key concepts, facts, or logical relationships are involved?

- Identify Knowledge Gaps: To answer this question correctly, what key information do you need to verify or obtain? Which statements in the options may be ambiguous or require fact-checking?

- Formulate a Search Strategy: For each key point and the options that need verification, what kind of keywords should you use for `web_search`? Please list the initial list of search keywords.

### 2. Execute Iterative Search and In-depth Analysis (Search & Parse)

- First-round Search: Use the keywords you consider most core for `web_search` to obtain background knowledge and an overview of the problem.

- Evaluation and Deepening: Browse the search results and identify authoritative and relevant information sources (such as encyclopedias, official documents, academic articles, and well-known technology websites). Use the `web_parse` tool to extract detailed information directly related to the problem from these high-quality links.

- Targeted Verification: Conduct targeted searches and analysis for each option. For example, for Option A, you can search for "Is the core claim in Option A valid?" or "The correct definition of the concept in Option A". Repeat this process for Options B, C, and D. Pay special attention to options that are contradictory or expressed in absolute terms.

- Cross-verification: Do not rely on a single information source. For key assertions, try to conduct search verification from another independent source (e.g., a different website or media outlet) to see if there is consensus or disagreement.

### 3. Comprehensive Comparison and Reasoning (Synthesize & Reason)

- Information Organization: Based on the collected information, briefly summarize the supporting and opposing evidence related to each candidate answer.

- Logical Reasoning: Conduct logical reasoning combined with verified facts. Even if a candidate answer "sounds" reasonable, is it inconsistent with verified facts or basic logic?

- Identify Traps: Reflect on whether any candidate answer takes advantage of common misunderstandings or outdated information. Does the evidence you found refute these traps?

### 4. Provide Final Judgment and Evidence (Conclude)

- Final Selection: What is your final judgment on which candidate answer is correct? Please answer clearly.

- Evidence Statement: Clearly and concisely state the core evidence for your judgment, and cite credible sources from `web_parse` as much as possible. Explain why this candidate answer is the most compelling and why the other candidate answers are excluded.

## Tool Usage Requirements:

- After each use of `web_search`, evaluate the relevance and authority of the results.

- Prioritize using `web_parse` to obtain accurate information from high-authority, high-relevance links, rather than relying solely on search summaries.

- Your thinking process should fully demonstrate the above steps.

- You should not be overconfident in your knowledge or reasoning.

- Each time you write code put the code into <code></code> snippet, and the results must be printed out through print function. Please strictly follow Python's indentation rules; do not add any extra indentation to the code. Pause after submitting any code for information retrieval or scientific computation; resume analysis only once the code has finished running.

)";

constexpr std::string_view kSelectorTail = R"(
- Finally, you should analyze whether each response is correct.

Notice

1. Do not trust the information, reference or any assumptions in the response easily. You must write codes to verify it before reaching a conclusion.

2. Do not be influenced by the majority number of final answers. They may collude to deceive you!

3. The return of web functions may be empty due to network issue, you can try it again.

4. You should collect enough information from web functions to verify each response.

## Format Requirement
Your response MUST follow this exact format:

VERIFICATION:
[ Your detailed verification process for response 1 here ]
[ Your detailed verification process for response 2 here ]
...
[ Your detailed verification process for response {PARALLEL_NUM} here ]

CROSS VERIFICATION
[ Search for multiple perspectives on contentious points to reduce AI hallucinations ]

CONCLUSION:
[ Your brief summarization of the verification process and the final decision ]

FINAL DECISION: <select>Response X</select>

Replace X with the response index, for example 1, 2, ..., up to {PARALLEL_NUM}. The <select> tags are required.)";

constexpr std::string_view kWebConclusion = R"(Please analyze the provided web content and answer the user's question based strictly on that content:

1. Provide a comprehensive response regarding content related to the user's question. Do not omit any details.

2. Ensure all provided information originates strictly from the web content; fabrication of non-existent information is prohibited. If the web content cannot answer the user's question, please state that it is irrelevant.

3. If the web content contains new URLs that might be relevant to the user's question, list them and provide a relevance score indicating how strongly that page relates to the user's question.

Please reply to the user in Markdown format:

## Web Information

(Write the core content related to the user's question here)

## Other Relevant Web Pages

### Web Page 1

#### Description

(xxx)

#### URL

(xxx)

#### Relevance Score

(0 ~ 1)

### Web Page 2

#### Description

(xxx)

#### URL

(xxx)

#### Relevance Score

(0 ~ 1)

Note:

1. "Other Relevant Web Pages" must be related to the user's question. If none exist, return an empty value.

2. Keep the overall response within 500 words, and provide only the most important relevant URLs, strictly limited to a maximum of 2.

The user's question is: {user}, and the web content is: {info}.)";

constexpr std::string_view kSeedInit = R"(List 10 common phrases for each field in {domains}.

Put them in separate list with a high-level dictionary in python.)";

constexpr std::string_view kSeedExtraction = R"(You are a knowledge-enhancement expert, helping readers identify and understand complex terminology efficiently.

Analyze the following text and extract all professional, technical, academic, or uncommon noun phrases that an average reader might not be familiar with and may need to look up for deeper understanding. Focus on terms from specialized fields such as  biology, medicine, chemistry, computer science, artificial intelligence, engineering, humanity, social science, math, physics, art, philosophy, finance, linguistics, or industry-specific domains.

Ensure that you exclude common vocabulary and focus only on terms that are likely to require external knowledge or research to fully comprehend. Prioritize precision and clarity in your explanations.

**Format requirements**:
List all professional **noun phrases** with more than one word and separate them in comma. Put them as a list inside the tags <answer> </answer>.

Text:
{original_content})";

constexpr std::string_view kQaGeneration = R"(You need to create a challenging question for deep search based on real information.

You should start by understanding the seed and planning diverse perspectives for search with the think tool. Then you should collect information from the internet, then select a truth, and create a question where the truth needs to be discovered through web_search.

You will start with a random "seed", then web_search and url_browse for whatever you want on the Internet, and create the question and truth from the information you gather.

You should collect online knowledge from different perspectives with web_search and url_browse tools. Then, you should create a comprehensive and challenging question covering multiple knowledge.

You should provide several subtle and blurred clues to make the question challenging, while ensuring the truth is unique.

There are some question examples:
{examples}

Let's start, with the seed of "{seed}".

You need to provide the following information in the final <answer></answer> tag:
<question>
{The challenging question you created based on real information.} </question>

<truth>
{The one and only exact truth to the question.}
</truth>

IMPORTANT: You must include the <question> and <truth> tags in your final response for the system to parse your answer correctly. Do not provide any other response format.

IMPORTANT: You must plan and search from at least 3 different perspectives and use knowledge from different perspectives to construct a very challenging question, which needs multi-hop reasoning and search.

IMPORTANT: Do not search repetitive and similar queries.)";

constexpr std::string_view kJudge = R"(You are grading an answer against a reference.

Question: {question}

Predicted answer: {prediction}

Reference answer: {gold}

Decide whether the predicted answer is equivalent to the reference answer. Ignore formatting differences such as \boxed{} or surrounding whitespace; do not give credit for partially correct or hedged answers.

End your reply with exactly one line: "VERDICT: yes" if the prediction is correct, otherwise "VERDICT: no".)";

constexpr std::string_view kConsistency = R"(You are auditing a reasoning transcript.

Question: {question}

Reasoning:
{reasoning}

Final answer: {final_answer}

Check whether the final answer follows from the reasoning, or whether the reasoning contradicts it (for example, the reasoning derives one value and the final answer states another).

End your reply with exactly one line: "VERDICT: consistent" or "VERDICT: contradictory".)";

std::string optional_answer(const std::optional<std::string>& last_answer)
{
    return last_answer ? *last_answer : std::string(kNoAnswerMarker);
}

} // namespace

std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values)
{
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += tmpl[i++];
    }
    return out;
}

std::string render_solver_prompt(std::string_view query, const std::optional<std::string>& last_answer)
{
    std::string t = "The problem is: {query}\n\n";
    if (last_answer.has_value()) {
        t += kReanswer;
    }
    t += "Solve the problem with the help of feedback from a code executor. ";
    t += kCodeIntro;
    t += " ";
    t += kToolHelp;
    t += "\n\n";
    t += kWorkflow;
    t += "\n\n";
    t += kCodeExamples;
    t += "\n\n- Put your final answer in <answer></answer> with boxed.";
    return fill_template(t, {{"query", std::string(query)}, {"last_round_answer", optional_answer(last_answer)}});
}

std::string render_summary_prompt(std::string_view problem, std::string_view solution)
{
    return fill_template(kSummaryTemplate,
                         {{"problem", std::string(problem)}, {"student_solution", std::string(solution)}});
}

std::string render_critic_prompt(std::string_view query, std::string_view solution_summary,
                                 const std::optional<std::string>& last_answer)
{
    std::string t = "## Problem\n\n{query}\n\n## Student's Solution\n\n{solution_summary}\n\n";
    if (last_answer.has_value()) {
        t += kReanswer;
    }
    t += "## Your Job\nYou should critically check the student's solution to the problem, then correct it if "
         "needed and write your own answer.\n\nSolve the problem with the help of feedback from a code executor. ";
    t += kCodeIntro;
    t += " ";
    t += kToolHelp;
    t += "\n\n";
    t += kWorkflow;
    t += "\n\n";
    t += kCodeExamples;
    t += "\n\n- Put your final answer in <answer></answer> with boxed.";
    return fill_template(t, {{"query", std::string(query)},
                             {"solution_summary", std::string(solution_summary)},
                             {"last_round_answer", optional_answer(last_answer)}});
}

std::string render_selector_template(std::string_view query, std::size_t parallel_num, std::string_view responses,
                                     const std::optional<std::string>& history)
{
    std::string t(kSelectorHead);
    if (history) {
        t += kReselect;
    }
    t += kSelectorBody;
    t += kCodeIntro;
    t += " ";
    t += kToolHelp;
    t += "\n\n";
    t += kSelectorProcess;
    t += kCodeExamples;
    t += kSelectorTail;
    return fill_template(t, {{"PARALLEL_NUM", std::to_string(parallel_num)},
                             {"query", std::string(query)},
                             {"responses", std::string(responses)},
                             {"last_selection", history.value_or(std::string{})}});
}

std::string render_web_conclusion_prompt(std::string_view user, std::string_view info)
{
    return fill_template(kWebConclusion, {{"user", std::string(user)}, {"info", std::string(info)}});
}

std::string render_seed_init_prompt(const std::vector<std::string>& domains)
{
    std::string joined;
    for (std::size_t i = 0; i < domains.size(); ++i) {
        joined += (i ? ", " : "") + domains[i];
    }
    return fill_template(kSeedInit, {{"domains", joined}});
}

std::string render_seed_extraction_prompt(std::string_view original_content)
{
    return fill_template(kSeedExtraction, {{"original_content", std::string(original_content)}});
}

std::string render_qa_generation_prompt(std::string_view examples, std::string_view seed)
{
    return fill_template(kQaGeneration, {{"examples", std::string(examples)}, {"seed", std::string(seed)}});
}

std::string render_judge_prompt(std::string_view question, std::string_view prediction, std::string_view gold)
{
    return fill_template(kJudge, {{"question", std::string(question)},
                                  {"prediction", std::string(prediction)},
                                  {"gold", std::string(gold)}});
}

std::string render_consistency_prompt(std::string_view question, std::string_view reasoning,
                                      std::string_view final_answer)
{
    return fill_template(kConsistency, {{"question", std::string(question)},
                                        {"reasoning", std::string(reasoning)},
                                        {"final_answer", std::string(final_answer)}});
}

} // namespace rethinker
