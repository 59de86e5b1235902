#pragma once

#include <span>
#include <string>

namespace bba::io {

/// Shortest round-trip decimal text for a double (deterministic bytes).
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);
void ensure_directory(const std::string& path);

}  // namespace bba::io
