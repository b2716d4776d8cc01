#pragma once

#include <string>

namespace qrank {

// Write via a temp file in the same directory, then rename over the target.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace qrank
