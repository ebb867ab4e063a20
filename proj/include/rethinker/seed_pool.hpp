#pragma once
// Seed-phrase pool for QA synthesis: initialized per domain from a model
// reply shaped like a Python dict of lists, and grown from phrases extracted
// out of discarded web context.

#include "rethinker/gateway.hpp"
#include "rethinker/trace.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace rethinker {

struct SeedPhrase {
    enum class Origin { initial, extracted };

    std::string text;
    std::string domain;
    Origin origin = Origin::initial;
};

std::string_view to_string(SeedPhrase::Origin origin);

// Phrases are unique case-insensitively; the first spelling wins.
class SeedPool {
public:
    bool add(SeedPhrase phrase);
    std::size_t merge(const std::vector<SeedPhrase>& phrases);   // number added

    bool contains(std::string_view text) const;
    std::size_t size() const { return phrases_.size(); }
    const std::vector<SeedPhrase>& phrases() const { return phrases_; }
    std::vector<std::string> domains() const;

    Json to_json() const;
    static SeedPool from_json(const Json& j);

private:
    std::vector<SeedPhrase> phrases_;
    std::unordered_set<std::string> keys_;
};

// {"Domain": ["a", "b"], ...} in Python literal syntax (either quote style,
// optional trailing commas, surrounding prose or code fences ignored).
// Throws ParseError.
std::map<std::string, std::vector<std::string>> parse_python_dict(std::string_view text);

// Comma/newline separated list inside the last <answer> region; phrases of
// fewer than two words are dropped. nullopt when there is no <answer>.
std::optional<std::vector<std::string>> parse_extracted_phrases(std::string_view text);

// Both retry the generation once on a parse failure, then warn and give up
// (empty result).
SeedPool init_seed_pool(const std::vector<std::string>& domains, Gateway& gateway, TraceWriter* trace = nullptr);
std::vector<SeedPhrase> extract_seed_phrases(std::string_view text, Gateway& gateway, TraceWriter* trace = nullptr,
                                             std::string_view domain = {});

} // namespace rethinker
