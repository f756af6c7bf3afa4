#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sllb {

// FNV-1a over raw bytes; used for content hashes (always fed fixed-width
// little-endian encodings, never text, so hashes are platform-stable).
struct Fnv1a64 {
  uint64_t state = 0xcbf29ce484222325ull;
  void update(const void* data, size_t len);
  void update_u32(uint32_t v);
  void update_u64(uint64_t v);
  void update_f64(double v);  // hashes the bit pattern
  uint64_t digest() const { return state; }
};

std::string hex64(uint64_t v);

// Shortest round-trippable decimal for an f64 (printf %.17g, trimmed).
std::string format_f64(double v);

// Writes via temp file + rename so readers never observe partial content.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::optional<std::string> env_string(const char* name);
std::optional<int64_t> env_int(const char* name);

// Runs fn(i) for i in [0, n) across up to `threads` workers (callers pass the
// SLLB_THREADS value). threads <= 1 or n <= 1 degrades to a serial loop.
void parallel_for(int64_t n, int64_t threads, const std::function<void(int64_t)>& fn);

double median(std::vector<double> values);

}  // namespace sllb
