#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace flew::io {

void write_u8(std::ostream& out, std::uint8_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);
void write_string(std::ostream& out, const std::string& s);  // u32 length + bytes

std::uint8_t read_u8(std::istream& in);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);
std::string read_string(std::istream& in);

void expect_magic(std::istream& in, const char (&magic)[5]);
void write_magic(std::ostream& out, const char (&magic)[5]);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(const std::string& bytes);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling and rename so readers never see partial files.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace flew::io
