#pragma once

#include <string>

namespace kptrack {

/// Reads a whole file; throws IoError if unreadable.
std::string read_text(const std::string& path);

/// Writes via temp file + rename so readers never observe a partial file.
void write_text_atomic(const std::string& path, const std::string& content);

} // namespace kptrack
