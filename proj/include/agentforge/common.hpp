#pragma once

#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace agentforge {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// bad user/config input; message names the offending field where possible
struct ValidationError : Error {
  using Error::Error;
};

// a remote call failed after all retries; safe to retry the whole operation
struct TransportError : Error {
  using Error::Error;
};

// the backend answered but the payload could not be decoded
struct DecodeError : Error {
  DecodeError(const std::string& what, std::string raw_payload)
      : Error(what), payload(std::move(raw_payload)) {}
  std::string payload;
};

struct ParseError : Error {
  using Error::Error;
};

struct PlanningError : Error {
  using Error::Error;
};

struct StoreError : Error {
  using Error::Error;
};

// a "can't happen" condition; indicates a bug, not bad input
struct InvariantError : Error {
  using Error::Error;
};

inline constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ull;
inline constexpr uint64_t kFnvPrime = 0x00000100000001b3ull;

uint64_t fnv1a64(std::string_view bytes, uint64_t state = kFnvOffsetBasis);
uint64_t fnv1a64(const void* data, size_t size, uint64_t state = kFnvOffsetBasis);

// order-sensitive combiner for deriving sub-seeds
uint64_t mix64(uint64_t a, uint64_t b);

std::string hex16(uint64_t value);

// SplitMix64; every piece of randomness in the system flows through this so
// results do not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next();
  // uniform in [0, n), n > 0
  uint64_t below(uint64_t n);
  // uniform in [0, 1)
  double real01();
  bool chance(double p) { return real01() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

 private:
  uint64_t state_;
};

// Runs body(0..count-1) on up to `jobs` threads. Results must be written to
// index-addressed slots so the schedule cannot change the outcome.
// jobs <= 1 runs inline.
void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& body);

std::string read_text_file(const std::filesystem::path& path);
// write to a sibling temp file, then rename into place
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);

// non-blank lines of a JSONL (or any line-oriented) file, in file order
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace agentforge
