#pragma once
// String helpers shared across modules: tag-region scanning, answer
// normalization, small formatting utilities.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rethinker {

struct TagScan {
    std::vector<std::string> regions;   // inner text of well-formed regions, in order
    bool unterminated = false;          // an opening tag had no closing tag
};

// Scans `text` for open...close regions. Regions do not nest; an opening tag
// with no later closing tag ends the scan and sets `unterminated`.
TagScan scan_tag_regions(std::string_view text, std::string_view open, std::string_view close);

std::optional<std::string> last_tag_region(std::string_view text, std::string_view open,
                                           std::string_view close);

// Inner content of the last \boxed{...} (balanced braces).
std::optional<std::string> last_boxed(std::string_view text);

// Answer comparison form: \boxed{} and $ markup stripped, whitespace collapsed.
std::string normalize_answer(std::string_view answer);

std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
bool contains(std::string_view haystack, std::string_view needle);
bool starts_with_ci(std::string_view s, std::string_view prefix);

std::string format_fixed(double value, int decimals);
std::string utc_timestamp_now();

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t value);

} // namespace rethinker
