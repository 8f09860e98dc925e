#include "mpgan/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "mpgan/errors.hpp"
#include "mpgan/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts are unsupported");

namespace mpgan::io {

namespace {
template <typename T>
void write_raw(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is, const char* what) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw FormatError(std::string("truncated while reading ") + what);
  return v;
}
}  // namespace

void write_u32(std::ostream& os, std::uint32_t v) { write_raw(os, v); }
void write_u64(std::ostream& os, std::uint64_t v) { write_raw(os, v); }
void write_f32(std::ostream& os, float v) { write_raw(os, v); }
void write_f64(std::ostream& os, double v) { write_raw(os, v); }
void write_magic(std::ostream& os, const char magic[4]) { os.write(magic, 4); }

std::uint32_t read_u32(std::istream& is, const char* what) { return read_raw<std::uint32_t>(is, what); }
std::uint64_t read_u64(std::istream& is, const char* what) { return read_raw<std::uint64_t>(is, what); }
float read_f32(std::istream& is, const char* what) { return read_raw<float>(is, what); }
double read_f64(std::istream& is, const char* what) { return read_raw<double>(is, what); }

void expect_magic(std::istream& is, const char magic[4], const char* what) {
  char buf[4] = {};
  is.read(buf, 4);
  if (!is || std::memcmp(buf, magic, 4) != 0)
    throw FormatError(std::string("bad magic in ") + what);
}

void read_f32_block(std::istream& is, float* out, std::size_t n, const char* what) {
  is.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(n * sizeof(float)));
  if (!is) throw FormatError(std::string("truncated while reading ") + what);
}

void write_f32_block(std::ostream& os, const float* in, std::size_t n) {
  os.write(reinterpret_cast<const char*>(in), static_cast<std::streamsize>(n * sizeof(float)));
}

void read_f64_block(std::istream& is, double* out, std::size_t n, const char* what) {
  is.read(reinterpret_cast<char*>(out), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw FormatError(std::string("truncated while reading ") + what);
}

void write_f64_block(std::ostream& os, const double* in, std::size_t n) {
  os.write(reinterpret_cast<const char*>(in), static_cast<std::streamsize>(n * sizeof(double)));
}

void atomic_write_file(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open for write: " + tmp.string());
    writer(os);
    os.flush();
    if (!os) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  atomic_write_file(path, [&](std::ostream& os) { os.write(content.data(), static_cast<std::streamsize>(content.size())); });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open: " + path.string());
  std::string out((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return out;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  return fnv1a64(read_file(path));
}

}  // namespace mpgan::io
