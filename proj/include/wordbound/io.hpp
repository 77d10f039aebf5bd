#pragma once

#include <string>
#include <vector>

namespace wordbound {

// Reads line-delimited UTF-8 text; validates encoding (throws InvalidUtf8)
// and strips trailing "\r".
std::vector<std::string> read_lines(const std::string& path);

void write_lines(const std::string& path, const std::vector<std::string>& lines);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace wordbound
