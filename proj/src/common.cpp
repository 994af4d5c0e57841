#include "agentforge/common.hpp"

#include <atomic>
#include <cctype>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace agentforge {

uint64_t fnv1a64(std::string_view bytes, uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= kFnvPrime;
  }
  return state;
}

uint64_t fnv1a64(const void* data, size_t size, uint64_t state) {
  return fnv1a64(std::string_view(static_cast<const char*>(data), size), state);
}

namespace {
uint64_t splitmix_step(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace

uint64_t mix64(uint64_t a, uint64_t b) {
  uint64_t state = a ^ 0x632be59bd9b4e019ull;
  uint64_t x = splitmix_step(state);
  state ^= b;
  return x ^ splitmix_step(state);
}

std::string hex16(uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

uint64_t Rng::next() { return splitmix_step(state_); }

uint64_t Rng::below(uint64_t n) {
  if (n == 0) throw InvariantError("Rng::below called with n == 0");
  // Lemire's unbiased bounded generation
  while (true) {
    uint64_t x = next();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    uint64_t low = static_cast<uint64_t>(m);
    if (low >= n || low >= static_cast<uint64_t>(-static_cast<int64_t>(n)) % n) {
      return static_cast<uint64_t>(m >> 64);
    }
  }
}

double Rng::real01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

void parallel_for(size_t count, int jobs, const std::function<void(size_t)>& body) {
  if (count == 0) return;
  size_t workers = jobs <= 1 ? 1 : std::min<size_t>(static_cast<size_t>(jobs), count);
  if (workers == 1) {
    for (size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<size_t> cursor{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        size_t i = cursor.fetch_add(1);
        if (i >= count) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreError("cannot open file for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot open file for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw StoreError("short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::string body = read_text_file(path);
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos < body.size()) {
    size_t end = body.find('\n', pos);
    if (end == std::string::npos) end = body.size();
    std::string line = body.substr(pos, end - pos);
    pos = end + 1;
    if (!trim(line).empty()) lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace agentforge
