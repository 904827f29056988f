#ifndef PCP_TEXT_H_
#define PCP_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace pcp {

// Collapses internal whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

// ASCII lowercase; bytes outside ASCII pass through unchanged.
std::string to_lower(std::string_view text);

// Lowercased, whitespace-normalized form used for answer-word matching.
std::string canonical_word(std::string_view word);

std::vector<std::string> split(std::string_view text, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with(std::string_view text, std::string_view prefix);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace pcp

#endif  // PCP_TEXT_H_
