#include "rethinker/seed_pool.hpp"

#include "rethinker/errors.hpp"
#include "rethinker/prompts.hpp"
#include "rethinker/text.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <stdexcept>

namespace rethinker {

std::string_view to_string(SeedPhrase::Origin origin)
{
    return origin == SeedPhrase::Origin::initial ? "initial" : "extracted";
}

bool SeedPool::add(SeedPhrase phrase)
{
    phrase.text = collapse_whitespace(phrase.text);
    if (phrase.text.empty()) {
        return false;
    }
    if (!keys_.insert(to_lower(phrase.text)).second) {
        return false;
    }
    phrases_.push_back(std::move(phrase));
    return true;
}

std::size_t SeedPool::merge(const std::vector<SeedPhrase>& phrases)
{
    std::size_t added = 0;
    for (const auto& p : phrases) {
        added += add(p) ? 1 : 0;
    }
    return added;
}

bool SeedPool::contains(std::string_view text) const
{
    return keys_.count(to_lower(collapse_whitespace(text))) > 0;
}

std::vector<std::string> SeedPool::domains() const
{
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& p : phrases_) {
        if (!p.domain.empty() && seen.insert(p.domain).second) {
            out.push_back(p.domain);
        }
    }
    return out;
}

Json SeedPool::to_json() const
{
    Json arr = Json::array();
    for (const auto& p : phrases_) {
        arr.push_back(Json{{"text", p.text}, {"domain", p.domain}, {"origin", to_string(p.origin)}});
    }
    return Json{{"phrases", arr}};
}

SeedPool SeedPool::from_json(const Json& j)
{
    SeedPool pool;
    for (const auto& p : j.at("phrases")) {
        auto origin = p.value("origin", std::string("initial"));
        if (origin != "initial" && origin != "extracted") {
            throw ParseError(0, "unknown seed phrase origin '" + origin + "'");
        }
        pool.add(SeedPhrase{p.at("text").get<std::string>(), p.value("domain", std::string{}),
                            origin == "initial" ? SeedPhrase::Origin::initial : SeedPhrase::Origin::extracted});
    }
    return pool;
}

namespace {

struct Tok {
    enum Kind { str, punct, end } kind;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(std::string_view s) : s_(s) {}

    Tok next()
    {
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
        if (pos_ >= s_.size()) {
            return {Tok::end, {}};
        }
        char c = s_[pos_];
        if (c == '"' || c == '\'') {
            return {Tok::str, quoted(c)};
        }
        ++pos_;
        return {Tok::punct, std::string(1, c)};
    }

private:
    std::string quoted(char q)
    {
        ++pos_;
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != q) {
            if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) {
                ++pos_;
            }
            out += s_[pos_++];
        }
        if (pos_ >= s_.size()) {
            throw ParseError(0, "unterminated string literal");
        }
        ++pos_;
        return out;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

void expect(const Tok& t, const char* what)
{
    if (t.kind != Tok::punct || t.text != what) {
        throw ParseError(0, std::string("expected '") + what + "' in phrase dictionary");
    }
}

} // namespace

std::map<std::string, std::vector<std::string>> parse_python_dict(std::string_view text)
{
    auto open = text.find('{');
    if (open == std::string_view::npos) {
        throw ParseError(0, "no dictionary literal found");
    }
    Lexer lex(text.substr(open + 1));
    std::map<std::string, std::vector<std::string>> out;
    for (Tok t = lex.next();; t = lex.next()) {
        if (t.kind == Tok::punct && t.text == "}") {
            break;
        }
        if (t.kind != Tok::str) {
            throw ParseError(0, "expected a quoted domain name");
        }
        auto& list = out[trim(t.text)];
        expect(lex.next(), ":");
        Tok b = lex.next();
        if (b.kind != Tok::punct || (b.text != "[" && b.text != "(")) {
            throw ParseError(0, "expected a list of phrases");
        }
        const std::string close = b.text == "[" ? "]" : ")";
        for (Tok e = lex.next();; e = lex.next()) {
            if (e.kind == Tok::punct && e.text == close) {
                break;
            }
            if (e.kind != Tok::str) {
                throw ParseError(0, "expected a quoted phrase");
            }
            list.push_back(trim(e.text));
            Tok sep = lex.next();
            if (sep.kind == Tok::punct && sep.text == close) {
                break;
            }
            expect(sep, ",");
        }
        Tok sep = lex.next();
        if (sep.kind == Tok::punct && sep.text == "}") {
            break;
        }
        expect(sep, ",");
    }
    if (out.empty()) {
        throw ParseError(0, "empty phrase dictionary");
    }
    return out;
}

std::optional<std::vector<std::string>> parse_extracted_phrases(std::string_view text)
{
    auto region = last_tag_region(text, "<answer>", "</answer>");
    if (!region) {
        return std::nullopt;
    }
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        auto p = collapse_whitespace(cur);
        cur.clear();
        while (!p.empty() && (p.front() == '-' || p.front() == '*' || p.front() == ' ')) {
            p.erase(0, 1);
        }
        while (!p.empty() && (p.back() == '.' || p.back() == ';')) {
            p.pop_back();
        }
        if (split_whitespace(p).size() >= 2) {
            out.push_back(p);
        }
    };
    for (char c : *region) {
        if (c == ',' || c == '\n') {
            flush();
        } else {
            cur += c;
        }
    }
    flush();
    return out;
}

namespace {

template <typename Parse>
auto ask_with_retry(const std::string& prompt, const std::string& tag_prefix, Gateway& gateway, TraceWriter* trace,
                    Parse parse) -> std::optional<decltype(parse(std::string_view{}))>
{
    TraceContext ctx{"seed", 0, Stage::seed, 0};
    std::vector<Message> messages{Message{Role::user, prompt, std::nullopt}};
    for (int attempt = 0; attempt < 2; ++attempt) {
        auto request = gateway.make_request(Stage::seed, messages, tag_prefix + "[attempt=" + std::to_string(attempt) + "]");
        auto result = gateway.generate(request);
        if (trace) {
            trace->append_model(ctx, request, result);
        }
        try {
            return parse(result.text);
        } catch (const ParseError& e) {
            spdlog::warn("{}: unparseable reply (attempt {}): {}", tag_prefix, attempt + 1, e.what());
        }
    }
    return std::nullopt;
}

} // namespace

SeedPool init_seed_pool(const std::vector<std::string>& domains, Gateway& gateway, TraceWriter* trace)
{
    if (domains.empty()) {
        throw std::invalid_argument("init_seed_pool: no domains");
    }
    SeedPool pool;
    auto parsed = ask_with_retry(render_seed_init_prompt(domains), "[seed=init]", gateway, trace,
                                 [](std::string_view text) { return parse_python_dict(text); });
    if (!parsed) {
        spdlog::warn("seed pool initialization skipped: no parsable phrase dictionary");
        return pool;
    }
    for (const auto& [domain, phrases] : *parsed) {
        for (const auto& p : phrases) {
            pool.add(SeedPhrase{p, domain, SeedPhrase::Origin::initial});
        }
    }
    return pool;
}

std::vector<SeedPhrase> extract_seed_phrases(std::string_view text, Gateway& gateway, TraceWriter* trace,
                                             std::string_view domain)
{
    if (trim(text).empty()) {
        throw std::invalid_argument("extract_seed_phrases: empty text");
    }
    auto tag = "[seed=extract][text=" + hex64(fnv1a64(text)) + "]";
    auto parsed = ask_with_retry(render_seed_extraction_prompt(text), tag, gateway, trace, [](std::string_view reply) {
        auto phrases = parse_extracted_phrases(reply);
        if (!phrases) {
            throw ParseError(0, "no <answer> list");
        }
        return *phrases;
    });
    std::vector<SeedPhrase> out;
    if (!parsed) {
        spdlog::warn("seed phrase extraction skipped: no parsable <answer> list");
        return out;
    }
    for (auto& p : *parsed) {
        out.push_back(SeedPhrase{std::move(p), std::string(domain), SeedPhrase::Origin::extracted});
    }
    return out;
}

} // namespace rethinker
