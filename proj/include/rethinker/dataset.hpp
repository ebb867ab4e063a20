#pragma once

#include "rethinker/types.hpp"

#include <filesystem>
#include <istream>
#include <vector>

namespace rethinker {

// JSONL, one Query per line: {"id", "question", "answer"?, "category"?}.
// Blank lines are skipped. Throws ParseError naming the offending line.
std::vector<Query> read_dataset(std::istream& in);
std::vector<Query> load_dataset(const std::filesystem::path& path);

} // namespace rethinker
