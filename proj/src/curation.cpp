#include "rethinker/curation.hpp"

#include "rethinker/errors.hpp"
#include "rethinker/reasoning.hpp"
#include "rethinker/text.hpp"

#include "parallel.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>

namespace rethinker {

std::optional<std::string> item_prediction(const CorpusItem& item)
{
    if (item.prediction) {
        return item.prediction;
    }
    if (auto a = extract_answer(item.trajectory)) {
        return a;
    }
    for (auto it = item.trajectory.messages.rbegin(); it != item.trajectory.messages.rend(); ++it) {
        if (it->role == Role::assistant) {
            return last_boxed(it->content);
        }
    }
    return std::nullopt;
}

namespace {

// Inverse of the flattened user text: "<history>\n[role]\ncontent\n\n...
// </history>\n\n" + question. Absent when the text is not in that shape.
std::optional<std::vector<Message>> unflatten_history(const std::string& user_text, const std::string& question)
{
    static constexpr std::string_view open = "<history>\n";
    const std::string close = "</history>\n\n" + question;
    if (!user_text.starts_with(open) || user_text.size() < open.size() + close.size() ||
        user_text.compare(user_text.size() - close.size(), close.size(), close) != 0) {
        return std::nullopt;
    }
    const auto body = user_text.substr(open.size(), user_text.size() - open.size() - close.size());
    auto header_at = [&](std::size_t pos) -> std::optional<std::pair<Role, std::size_t>> {
        if (pos >= body.size() || body[pos] != '[') {
            return std::nullopt;
        }
        auto end = body.find("]\n", pos);
        if (end == std::string::npos) {
            return std::nullopt;
        }
        try {
            return std::pair{role_from_string(body.substr(pos + 1, end - pos - 1)), end + 2};
        } catch (const std::exception&) {
            return std::nullopt;
        }
    };
    std::vector<Message> out;
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto header = header_at(pos);
        if (!header) {
            return std::nullopt;
        }
        // The entry runs to the next "\n\n[role]\n" or to the end of the block.
        auto start = header->second;
        auto end = start;
        for (;;) {
            end = body.find("\n\n", end);
            if (end == std::string::npos) {
                return std::nullopt;
            }
            if (end + 2 == body.size() || header_at(end + 2)) {
                break;
            }
            ++end;
        }
        out.push_back(Message{header->first, body.substr(start, end - start), std::nullopt});
        pos = end + 2;
    }
    return out;
}

CorpusItem from_dataset_row(const Json& row)
{
    const auto& prov = row.at("provenance");
    CorpusItem item;
    item.id = prov.at("id").get<std::string>();
    item.question = prov.at("question").get<std::string>();
    if (prov.contains("gold") && !prov["gold"].is_null()) {
        item.gold = prov["gold"].get<std::string>();
    }
    item.stage = stage_from_string(prov.at("stage").get<std::string>());
    if (prov.contains("prediction") && !prov["prediction"].is_null()) {
        item.prediction = prov["prediction"].get<std::string>();
    }
    auto& t = item.trajectory;
    const auto& src = prov.value("source", Json::object());
    t.query_id = src.value("query_id", item.id);
    t.path_index = src.value("path_index", 0);
    t.round_index = src.value("round_index", 0);
    t.stage = item.stage;
    const auto user_text = row.at("user").get<std::string>();
    if (auto history = unflatten_history(user_text, item.question)) {
        t.messages = std::move(*history);
    } else {
        t.messages.push_back(Message{Role::user, user_text, std::nullopt});
    }
    t.messages.push_back(Message{Role::assistant, row.at("assistant").get<std::string>(), std::nullopt});
    if (prov.contains("tool_events")) {
        t.tool_events = prov["tool_events"].get<std::vector<ToolInvocation>>();
    }
    t.step_count = static_cast<int>(std::count_if(t.messages.begin(), t.messages.end(),
                                                  [](const Message& m) { return m.role == Role::assistant; }));
    t.final_answer = extract_answer(t);
    return item;
}

} // namespace

std::vector<CorpusItem> read_corpus(std::istream& in)
{
    std::vector<CorpusItem> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        auto row = Json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw ParseError(lineno, "corpus row is not a JSON object");
        }
        try {
            if (row.contains("provenance") && row.contains("user")) {
                out.push_back(from_dataset_row(row));
                continue;
            }
            CorpusItem item;
            item.id = row.at("id").get<std::string>();
            item.question = row.at("question").get<std::string>();
            if (row.contains("gold") && !row["gold"].is_null()) {
                item.gold = row["gold"].get<std::string>();
            }
            item.stage = stage_from_string(row.at("stage").get<std::string>());
            item.trajectory = row.at("trajectory").get<Trajectory>();
            if (row.contains("prediction") && !row["prediction"].is_null()) {
                item.prediction = row["prediction"].get<std::string>();
            }
            out.push_back(std::move(item));
        } catch (const ParseError& e) {
            throw ParseError(lineno, e.what());
        } catch (const Json::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return out;
}

std::vector<CorpusItem> load_corpus(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(0, "cannot open corpus " + path.string());
    }
    return read_corpus(in);
}

Json corpus_row(const CorpusItem& item)
{
    Json j{{"id", item.id},
           {"question", item.question},
           {"stage", to_string(item.stage)},
           {"trajectory", item.trajectory}};
    j["gold"] = item.gold ? Json(*item.gold) : Json(nullptr);
    j["prediction"] = item.prediction ? Json(*item.prediction) : Json(nullptr);
    return j;
}

void validate_curation_config(const CurationConfig& c)
{
    if (c.call_min < 0) {
        throw ConfigError("call_min", "must be >= 0");
    }
    if (c.call_max < c.call_min) {
        throw ConfigError("call_max", "must be >= call_min");
    }
    if (!c.stage_ratios.empty()) {
        double sum = 0.0;
        for (const auto& [stage, r] : c.stage_ratios) {
            if (!(r >= 0.0) || !std::isfinite(r)) {
                throw ConfigError("stage_ratios", "ratios must be nonnegative");
            }
            sum += r;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ConfigError("stage_ratios", "ratios must sum to 1 (got " + std::to_string(sum) + ")");
        }
    }
    if (c.dedup_mode == DedupMode::embedding_hook && !c.similarity) {
        throw ConfigError("dedup_mode", "embedding-hook needs a similarity scorer");
    }
    if (!(c.similarity_threshold >= 0.0 && c.similarity_threshold <= 1.0)) {
        throw ConfigError("similarity_threshold", "must be in [0,1]");
    }
    if (c.max_in_flight < 1) {
        throw ConfigError("max_in_flight", "counts >= 1 (got " + std::to_string(c.max_in_flight) + ")");
    }
}

CurationConfig curation_config_from_json(const Json& j)
{
    CurationConfig c;
    if (!j.is_object()) {
        throw ConfigError("curation", "config must be a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "call_min") {
                c.call_min = value.get<int>();
            } else if (key == "call_max") {
                c.call_max = value.get<int>();
            } else if (key == "stage_ratios") {
                for (const auto& [stage, r] : value.items()) {
                    c.stage_ratios[stage_from_string(stage)] = r.get<double>();
                }
            } else if (key == "dedup_mode") {
                auto mode = value.get<std::string>();
                if (mode == "exact-normalized") {
                    c.dedup_mode = DedupMode::exact_normalized;
                } else if (mode == "embedding-hook") {
                    c.dedup_mode = DedupMode::embedding_hook;
                } else {
                    throw ConfigError("dedup_mode", "unknown mode '" + mode + "'");
                }
            } else if (key == "similarity_threshold") {
                c.similarity_threshold = value.get<double>();
            } else if (key == "seed") {
                c.seed = value.get<std::uint64_t>();
            } else if (key == "max_in_flight") {
                c.max_in_flight = value.get<int>();
            } else {
                throw ConfigError(key, "unknown curation key");
            }
        } catch (const Json::exception& e) {
            throw ConfigError(key, e.what());
        } catch (const ParseError& e) {
            throw ConfigError(key, e.what());
        }
    }
    return c;
}

Json dataset_row(const SftSample& s)
{
    return Json{{"user", s.user_text}, {"assistant", s.assistant_text}, {"provenance", s.provenance}};
}

std::string normalize_question(std::string_view question)
{
    std::string s;
    s.reserve(question.size());
    for (unsigned char ch : question) {
        s += std::ispunct(ch) ? ' ' : static_cast<char>(std::tolower(ch));
    }
    return collapse_whitespace(s);
}

FormatCheck validate_format(const Trajectory& t, const CurationConfig& config)
{
    FormatCheck check;
    const Message* final_assistant = nullptr;
    for (auto it = t.messages.rbegin(); it != t.messages.rend(); ++it) {
        if (it->role == Role::assistant) {
            final_assistant = &*it;
            break;
        }
    }
    if (!final_assistant || !last_tag_region(final_assistant->content, "<answer>", "</answer>")) {
        check.violations.push_back("answer-format");
    }
    bool pairing = !t.messages.empty() && t.messages.front().role != Role::assistant && final_assistant &&
                   !check_alternation(t).has_value();
    if (pairing) {
        // User and assistant turns alternate (tool feedback counts as a user turn).
        for (std::size_t i = 1; i < t.messages.size(); ++i) {
            bool prev_assistant = t.messages[i - 1].role == Role::assistant;
            bool cur_assistant = t.messages[i].role == Role::assistant;
            if (prev_assistant == cur_assistant) {
                pairing = false;
                break;
            }
        }
    }
    if (!pairing) {
        check.violations.push_back("pairing");
    }
    const auto calls = static_cast<long long>(t.tool_events.size());
    if (calls < config.call_min || calls > config.call_max) {
        check.violations.push_back("tool-density");
    }
    check.ok = check.violations.empty();
    return check;
}

std::optional<bool> check_correctness(const CorpusItem& item, Judge& judge)
{
    if (!item.gold) {
        return std::nullopt;
    }
    auto prediction = item_prediction(item);
    if (!prediction) {
        return false;
    }
    return judge.correct(item.question, *prediction, *item.gold, item.id);
}

std::vector<CorpusItem> deduplicate(std::vector<CorpusItem> corpus, const CurationConfig& config,
                                    std::vector<CorpusItem>* removed)
{
    // Groups never span reasoning stages, so a query keeps one trajectory per
    // stage for the rebalancing step.
    struct Group {
        Stage stage;
        std::string key;
        std::size_t best;
    };
    std::vector<Group> groups;
    std::vector<std::size_t> group_of(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto key = normalize_question(corpus[i].question);
        std::optional<std::size_t> found;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (groups[g].stage != corpus[i].stage) {
                continue;
            }
            bool same = config.dedup_mode == DedupMode::exact_normalized
                            ? groups[g].key == key
                            : config.similarity(groups[g].key, key) >= config.similarity_threshold;
            if (same) {
                found = g;
                break;
            }
        }
        if (!found) {
            groups.push_back(Group{corpus[i].stage, key, i});
            group_of[i] = groups.size() - 1;
            continue;
        }
        group_of[i] = *found;
        auto& g = groups[*found];
        if (corpus[i].trajectory.tool_events.size() > corpus[g.best].trajectory.tool_events.size()) {
            g.best = i;
        }
    }
    std::vector<CorpusItem> kept;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (groups[group_of[i]].best == i) {
            kept.push_back(std::move(corpus[i]));
        } else if (removed) {
            removed->push_back(std::move(corpus[i]));
        }
    }
    return kept;
}

std::vector<CorpusItem> rebalance(std::vector<CorpusItem> corpus, const std::map<Stage, double>& ratios,
                                  std::uint64_t seed, std::vector<CorpusItem>* removed)
{
    if (ratios.empty() || corpus.empty()) {
        return corpus;
    }
    std::map<Stage, std::vector<std::size_t>> by_stage;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        by_stage[corpus[i].stage].push_back(i);
    }
    if (by_stage.size() == 1) {
        spdlog::warn("rebalance: corpus holds a single stage; left unchanged");
        return corpus;
    }

    // Targets over the stages actually present.
    std::map<Stage, double> target;
    double mass = 0.0;
    for (const auto& [stage, idx] : by_stage) {
        auto it = ratios.find(stage);
        target[stage] = it == ratios.end() ? 0.0 : it->second;
        mass += target[stage];
    }
    for (const auto& [stage, r] : ratios) {
        if (r > 0.0 && !by_stage.count(stage)) {
            spdlog::warn("rebalance: stage {} has target {} but no samples; renormalizing", to_string(stage), r);
        }
    }
    if (mass <= 0.0) {
        spdlog::warn("rebalance: no present stage has a positive target; left unchanged");
        return corpus;
    }
    for (auto& [stage, r] : target) {
        r /= mass;
    }

    const double n = static_cast<double>(corpus.size());
    bool within = true;
    for (const auto& [stage, idx] : by_stage) {
        if (std::abs(static_cast<double>(idx.size()) - target[stage] * n) > 1.0) {
            within = false;
        }
    }
    if (within) {
        return corpus;
    }

    // Largest total size every positive-target stage can supply.
    double total = std::numeric_limits<double>::infinity();
    for (const auto& [stage, idx] : by_stage) {
        if (target[stage] > 0.0) {
            total = std::min(total, static_cast<double>(idx.size()) / target[stage]);
        }
    }
    total = std::floor(total + 1e-9);

    std::mt19937_64 rng(seed);
    std::vector<bool> keep(corpus.size(), false);
    for (const auto& [stage, idx] : by_stage) {
        auto quota = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(std::llround(target[stage] * total)));
        auto order = idx;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t k = 0; k < quota; ++k) {
            keep[order[k]] = true;
        }
    }
    std::vector<CorpusItem> kept;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (keep[i]) {
            kept.push_back(std::move(corpus[i]));
        } else if (removed) {
            removed->push_back(std::move(corpus[i]));
        }
    }
    return kept;
}

SftSample flatten(const CorpusItem& item, const std::vector<std::string>& passed_stages)
{
    const auto& msgs = item.trajectory.messages;
    std::size_t last = msgs.size();
    for (std::size_t i = msgs.size(); i-- > 0;) {
        if (msgs[i].role == Role::assistant) {
            last = i;
            break;
        }
    }
    SftSample s;
    std::string history;
    for (std::size_t i = 0; i < last && i < msgs.size(); ++i) {
        history += "[" + std::string(to_string(msgs[i].role)) + "]\n" + msgs[i].content + "\n\n";
    }
    s.user_text = "<history>\n" + history + "</history>\n\n" + item.question;
    s.assistant_text = last < msgs.size() ? msgs[last].content : std::string{};
    auto prediction = item_prediction(item);
    s.provenance = Json{{"id", item.id},
                        {"question", item.question},
                        {"gold", item.gold ? Json(*item.gold) : Json(nullptr)},
                        {"stage", to_string(item.stage)},
                        {"prediction", prediction ? Json(*prediction) : Json(nullptr)},
                        {"source",
                         Json{{"query_id", item.trajectory.query_id},
                              {"path_index", item.trajectory.path_index},
                              {"round_index", item.trajectory.round_index}}},
                        {"tool_events", item.trajectory.tool_events},
                        {"audit", passed_stages}};
    return s;
}

FinalizeResult flatten_and_finalize(const CorpusItem& item, Judge& judge, const std::vector<std::string>& passed_stages)
{
    FinalizeResult r;
    for (const auto& ev : item.trajectory.tool_events) {
        if (ev.failed()) {
            r.outcome = FinalizeResult::Outcome::rejected;
            r.reason = "failed-tool-call";
            return r;
        }
    }
    auto sample = flatten(item, passed_stages);
    auto final_answer = item_prediction(item).value_or(std::string{});
    auto verdict = judge.consistent(item.question, render_transcript(item.trajectory), final_answer, item.id);
    if (!verdict) {
        r.outcome = FinalizeResult::Outcome::quarantined;
        r.reason = "judge-failure";
        return r;
    }
    if (!*verdict) {
        r.outcome = FinalizeResult::Outcome::rejected;
        r.reason = "consistency";
        return r;
    }
    auto audit = passed_stages;
    audit.push_back("finalize");
    sample.provenance["audit"] = audit;
    r.sample = std::move(sample);
    return r;
}

Json curation_report_json(const CurationReport& report)
{
    Json stages = Json::array();
    for (const auto& s : report.stages) {
        stages.push_back(Json{{"name", s.name},
                              {"input", s.input},
                              {"kept", s.kept},
                              {"rejected", s.rejected},
                              {"quarantined", s.quarantined},
                              {"reasons", s.reasons}});
    }
    Json dispositions = Json::array();
    for (const auto& d : report.dispositions) {
        dispositions.push_back(Json{{"id", d.id}, {"outcome", d.outcome}, {"stage", d.stage}, {"reason", d.reason}});
    }
    return Json{{"input", report.input},
                {"kept", report.kept},
                {"rejected", report.rejected},
                {"quarantined", report.quarantined},
                {"stages", stages},
                {"reject_reasons", report.reject_reasons},
                {"dispositions", dispositions}};
}


CurationResult curate(const std::vector<CorpusItem>& corpus, const CurationConfig& config, Judge& judge)
{
    validate_curation_config(config);
    CurationResult result;
    auto& report = result.report;
    report.input = corpus.size();

    // Final disposition per input position; items are tracked by position so
    // repeated ids are still accounted for individually.
    std::vector<Disposition> disp(corpus.size());
    std::vector<std::size_t> alive(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        alive[i] = i;
        disp[i].id = corpus[i].id;
    }
    auto settle = [&](StageCounts& sc, std::size_t pos, const char* outcome, const std::string& reason) {
        disp[pos].outcome = outcome;
        disp[pos].stage = sc.name;
        disp[pos].reason = reason;
        if (std::string_view(outcome) == "rejected") {
            ++sc.rejected;
            ++sc.reasons[reason];
            ++report.reject_reasons[reason];
        } else {
            ++sc.quarantined;
            ++sc.reasons[reason];
        }
    };

    // 1. correctness
    {
        StageCounts sc;
        sc.name = "correctness";
        sc.input = alive.size();
        std::vector<std::optional<bool>> verdicts(alive.size());
        detail::parallel_for(alive.size(), config.max_in_flight, [&](std::size_t k) {
            try {
                verdicts[k] = check_correctness(corpus[alive[k]], judge);
            } catch (const std::exception& e) {
                spdlog::warn("correctness judge for {}: {}", corpus[alive[k]].id, e.what());
            }
        });
        std::vector<std::size_t> next;
        for (std::size_t k = 0; k < alive.size(); ++k) {
            const auto pos = alive[k];
            if (!verdicts[k]) {
                settle(sc, pos, "quarantined", corpus[pos].gold ? "judge-failure" : "missing-gold");
            } else if (!*verdicts[k]) {
                settle(sc, pos, "rejected", "wrong-answer");
            } else {
                next.push_back(pos);
            }
        }
        sc.kept = next.size();
        alive = std::move(next);
        report.stages.push_back(std::move(sc));
    }

    // 2. format / pairing / density
    {
        StageCounts sc;
        sc.name = "format";
        sc.input = alive.size();
        std::vector<std::size_t> next;
        for (auto pos : alive) {
            auto check = validate_format(corpus[pos].trajectory, config);
            if (check.ok) {
                next.push_back(pos);
            } else {
                settle(sc, pos, "rejected", check.violations.front());
            }
        }
        sc.kept = next.size();
        alive = std::move(next);
        report.stages.push_back(std::move(sc));
    }

    // 3 and 4 operate on item copies tagged with their input position.
    auto run_set_stage = [&](const char* name, const char* reason, auto&& op) {
        StageCounts sc;
        sc.name = name;
        sc.input = alive.size();
        std::vector<CorpusItem> items;
        for (auto pos : alive) {
            auto item = corpus[pos];
            item.id = std::to_string(pos);   // position tag, restored below
            items.push_back(std::move(item));
        }
        std::vector<CorpusItem> removed;
        auto kept = op(std::move(items), &removed);
        for (const auto& r : removed) {
            settle(sc, std::stoul(r.id), "rejected", reason);
        }
        std::vector<std::size_t> next;
        for (const auto& k : kept) {
            next.push_back(std::stoul(k.id));
        }
        std::sort(next.begin(), next.end());
        sc.kept = next.size();
        alive = std::move(next);
        report.stages.push_back(std::move(sc));
    };
    run_set_stage("dedup", "duplicate", [&](std::vector<CorpusItem> items, std::vector<CorpusItem>* removed) {
        return deduplicate(std::move(items), config, removed);
    });
    run_set_stage("rebalance", "rebalance", [&](std::vector<CorpusItem> items, std::vector<CorpusItem>* removed) {
        return rebalance(std::move(items), config.stage_ratios, config.seed, removed);
    });

    // 5. flatten, consistency, failed tool calls
    {
        StageCounts sc;
        sc.name = "finalize";
        sc.input = alive.size();
        const std::vector<std::string> passed{"correctness", "format", "dedup", "rebalance"};
        std::vector<FinalizeResult> results(alive.size());
        detail::parallel_for(alive.size(), config.max_in_flight, [&](std::size_t k) {
            try {
                results[k] = flatten_and_finalize(corpus[alive[k]], judge, passed);
            } catch (const std::exception& e) {
                spdlog::warn("consistency judge for {}: {}", corpus[alive[k]].id, e.what());
                results[k].outcome = FinalizeResult::Outcome::quarantined;
                results[k].reason = "judge-failure";
            }
        });
        for (std::size_t k = 0; k < alive.size(); ++k) {
            const auto pos = alive[k];
            auto& r = results[k];
            switch (r.outcome) {
            case FinalizeResult::Outcome::kept:
                disp[pos].outcome = "kept";
                disp[pos].stage = "finalize";
                result.dataset.push_back(std::move(*r.sample));
                ++sc.kept;
                break;
            case FinalizeResult::Outcome::rejected:
                settle(sc, pos, "rejected", r.reason);
                break;
            case FinalizeResult::Outcome::quarantined:
                settle(sc, pos, "quarantined", r.reason);
                break;
            }
        }
        report.stages.push_back(std::move(sc));
    }

    for (std::size_t i = 0; i < disp.size(); ++i) {
        if (disp[i].outcome == "kept") {
            ++report.kept;
        } else if (disp[i].outcome == "rejected") {
            ++report.rejected;
        } else {
            ++report.quarantined;
            result.quarantined.push_back(corpus[i]);
        }
    }
    report.dispositions = std::move(disp);
    return result;
}

} // namespace rethinker
