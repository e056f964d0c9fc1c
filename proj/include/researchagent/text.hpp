#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ra {

// Lowercases ASCII letters, maps every non-alphanumeric byte to a space,
// and splits on whitespace. Non-ASCII bytes pass through untouched.
std::vector<std::string> tokenize(std::string_view text);

// Trim + lowercase + collapse internal whitespace. Idempotent.
std::string canonicalize_entity(std::string_view name);

// FNV-1a over the bytes; stable across platforms.
std::uint64_t fnv1a64(std::string_view bytes);

std::string to_hex(std::uint64_t value);

// CRC32 (zlib polynomial) of the bytes, lowercase 8-digit hex.
std::string crc32_hex(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace ra
