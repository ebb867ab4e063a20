#pragma once
// Trajectory quality assurance: correctness, format/density, dedup,
// rebalance, flatten + consistency + failed-tool check, in that order.
//
// Every input item ends in exactly one of kept / rejected / quarantined.
// Quarantine holds items whose judge never produced a parsable verdict (or
// that had no gold to judge against).

#include "rethinker/judge.hpp"
#include "rethinker/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rethinker {

struct CorpusItem {
    std::string id;
    std::string question;
    std::optional<std::string> gold;
    Stage stage = Stage::solver;
    Trajectory trajectory;
    std::optional<std::string> prediction;   // defaults to the trajectory's answer

    bool operator==(const CorpusItem&) const = default;
};

// Prediction used for judging: explicit field, else the extracted <answer>,
// else the last \boxed{} in the final assistant message.
std::optional<std::string> item_prediction(const CorpusItem& item);

// Corpus rows: {"id", "question", "gold"?, "stage", "trajectory",
// "prediction"?}. Dataset rows ({"user", "assistant", "provenance"}) are
// accepted too, so curated output can be curated again.
std::vector<CorpusItem> read_corpus(std::istream& in);
std::vector<CorpusItem> load_corpus(const std::filesystem::path& path);
Json corpus_row(const CorpusItem& item);

enum class DedupMode { exact_normalized, embedding_hook };

struct CurationConfig {
    int call_min = 1;
    int call_max = 20;
    std::map<Stage, double> stage_ratios;   // empty: no rebalancing
    DedupMode dedup_mode = DedupMode::exact_normalized;
    // embedding_hook: similarity in [0,1] between two questions; pairs at or
    // above the threshold are duplicates.
    std::function<double(const std::string&, const std::string&)> similarity;
    double similarity_threshold = 0.9;
    std::uint64_t seed = 7;
    int max_in_flight = 8;
};

// Throws ConfigError.
void validate_curation_config(const CurationConfig& config);
// Keys: call_min, call_max, stage_ratios {stage: fraction}, dedup_mode
// ("exact-normalized"), similarity_threshold, seed, max_in_flight.
CurationConfig curation_config_from_json(const Json& j);

struct SftSample {
    std::string user_text;
    std::string assistant_text;
    Json provenance;
};

Json dataset_row(const SftSample& sample);

// Lowercase, punctuation to spaces, whitespace collapsed.
std::string normalize_question(std::string_view question);

struct FormatCheck {
    bool ok = true;
    std::vector<std::string> violations;     // "answer-format", "pairing", "tool-density"
};

FormatCheck validate_format(const Trajectory& trajectory, const CurationConfig& config);

// nullopt: quarantine.
std::optional<bool> check_correctness(const CorpusItem& item, Judge& judge);

std::vector<CorpusItem> deduplicate(std::vector<CorpusItem> corpus, const CurationConfig& config,
                                    std::vector<CorpusItem>* removed = nullptr);

std::vector<CorpusItem> rebalance(std::vector<CorpusItem> corpus, const std::map<Stage, double>& ratios,
                                  std::uint64_t seed, std::vector<CorpusItem>* removed = nullptr);

struct FinalizeResult {
    enum class Outcome { kept, rejected, quarantined };
    Outcome outcome = Outcome::kept;
    std::string reason;                      // "consistency", "failed-tool-call", "judge-failure"
    std::optional<SftSample> sample;
};

// Flattens the dialogue before the final assistant turn into the user text
// (inside <history>...</history>) followed by the question.
SftSample flatten(const CorpusItem& item, const std::vector<std::string>& passed_stages);

FinalizeResult flatten_and_finalize(const CorpusItem& item, Judge& judge,
                                    const std::vector<std::string>& passed_stages);

struct StageCounts {
    std::string name;
    std::size_t input = 0;
    std::size_t kept = 0;
    std::size_t rejected = 0;
    std::size_t quarantined = 0;
    std::map<std::string, std::size_t> reasons;
};

struct Disposition {
    std::string id;
    std::string outcome;                     // kept / rejected / quarantined
    std::string stage;
    std::string reason;
};

struct CurationReport {
    std::vector<StageCounts> stages;
    std::size_t input = 0;
    std::size_t kept = 0;
    std::size_t rejected = 0;
    std::size_t quarantined = 0;
    std::map<std::string, std::size_t> reject_reasons;
    std::vector<Disposition> dispositions;   // input order
};

Json curation_report_json(const CurationReport& report);

struct CurationResult {
    std::vector<SftSample> dataset;
    std::vector<CorpusItem> quarantined;
    CurationReport report;
};

CurationResult curate(const std::vector<CorpusItem>& corpus, const CurationConfig& config, Judge& judge);

} // namespace rethinker
