#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

// Little-endian binary primitives shared by the on-disk formats, plus
// atomic whole-file writes (write to temp, rename) so an interrupted run
// never leaves a partial artifact behind.

namespace mpgan::io {

void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
void write_f32(std::ostream& os, float v);
void write_f64(std::ostream& os, double v);
void write_magic(std::ostream& os, const char magic[4]);

std::uint32_t read_u32(std::istream& is, const char* what);
std::uint64_t read_u64(std::istream& is, const char* what);
float read_f32(std::istream& is, const char* what);
double read_f64(std::istream& is, const char* what);
void expect_magic(std::istream& is, const char magic[4], const char* what);

void read_f32_block(std::istream& is, float* out, std::size_t n, const char* what);
void write_f32_block(std::ostream& os, const float* in, std::size_t n);
void read_f64_block(std::istream& is, double* out, std::size_t n, const char* what);
void write_f64_block(std::ostream& os, const double* in, std::size_t n);

// Writes content via a sibling temp file and renames it into place.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);
void atomic_write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

std::string read_file(const std::filesystem::path& path);

// FNV-1a over the raw bytes of a file; used by run manifests and the
// determinism checks.
std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace mpgan::io
