#pragma once

#include <string>

namespace tgdyn {

// Writes content to a sibling temp file and renames it into place, so readers
// never observe a partially written file.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace tgdyn
