#pragma once
// Checked little-endian binary stream helpers shared by the checkpoint and
// dataset writers. Every failure surfaces as IoError with the offending path.

#include <cstdint>
#include <fstream>
#include <string>

#include "sfdm/common.hpp"

namespace sfdm::detail {

struct Writer {
  std::ofstream out;
  std::string path;

  explicit Writer(const std::string& p) : out(p, std::ios::binary), path(p) {
    check_io(out.good(), "cannot open file for writing: " + p);
  }
  void bytes(const void* p, size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    check_io(out.good(), "short write: " + path);
  }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64s(const double* p, size_t n) { bytes(p, n * sizeof(double)); }
  void finish() {
    out.flush();
    check_io(out.good(), "flush failed: " + path);
  }
};

struct Reader {
  std::ifstream in;
  std::string path;

  explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
    check_io(in.good(), "cannot open file: " + p);
  }
  void bytes(void* p, size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    check_io(in.gcount() == static_cast<std::streamsize>(n),
             "truncated file: " + path);
  }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, sizeof v); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, sizeof v); return v; }
  void f64s(double* p, size_t n) { bytes(p, n * sizeof(double)); }
  bool at_end() { return in.peek() == std::ifstream::traits_type::eof(); }
};

}  // namespace sfdm::detail
