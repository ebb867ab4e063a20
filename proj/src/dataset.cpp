#include "rethinker/dataset.hpp"

#include "rethinker/errors.hpp"
#include "rethinker/text.hpp"

#include <fstream>
#include <set>
#include <string>

namespace rethinker {

std::vector<Query> read_dataset(std::istream& in)
{
    std::vector<Query> queries;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        auto row = Json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw ParseError(lineno, "not a JSON object");
        }
        for (const char* key : {"id", "question"}) {
            if (!row.contains(key) || !row[key].is_string()) {
                throw ParseError(lineno, std::string("missing `") + key + "`");
            }
        }
        Query q;
        try {
            q = row.get<Query>();
        } catch (const Json::exception& e) {
            throw ParseError(lineno, e.what());
        }
        if (q.id.empty()) {
            throw ParseError(lineno, "empty `id`");
        }
        if (trim(q.text).empty()) {
            throw ParseError(lineno, "empty `question`");
        }
        if (!seen.insert(q.id).second) {
            throw ParseError(lineno, "duplicate id '" + q.id + "'");
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

std::vector<Query> load_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(0, "cannot open dataset " + path.string());
    }
    return read_dataset(in);
}

} // namespace rethinker
