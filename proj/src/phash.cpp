#include "agentforge/phash.hpp"

#include <bit>

#include "agentforge/common.hpp"

namespace agentforge {

namespace {
constexpr int kCols = 9;
constexpr int kRows = 8;

// mean intensity over the half-open pixel box for cell (r, c)
double cell_mean(const PixelGrid& grid, int r, int c) {
  int x0 = c * grid.width / kCols;
  int x1 = (c + 1) * grid.width / kCols;
  int y0 = r * grid.height / kRows;
  int y1 = (r + 1) * grid.height / kRows;
  if (x1 <= x0) x1 = std::min(x0 + 1, grid.width);
  if (y1 <= y0) y1 = std::min(y0 + 1, grid.height);
  if (x0 >= grid.width) x0 = grid.width - 1;
  if (y0 >= grid.height) y0 = grid.height - 1;
  long long sum = 0;
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) sum += grid.at(x, y);
  }
  return static_cast<double>(sum) / (static_cast<double>(x1 - x0) * (y1 - y0));
}
}  // namespace

PerceptualHash perceptual_hash(const PixelGrid& grid) {
  if (grid.width <= 0 || grid.height <= 0 ||
      grid.pixels.size() != static_cast<size_t>(grid.width) * grid.height) {
    throw ValidationError("perceptual_hash: empty or malformed grid");
  }
  uint64_t bits = 0;
  for (int r = 0; r < kRows; ++r) {
    double prev = cell_mean(grid, r, 0);
    for (int c = 0; c < kCols - 1; ++c) {
      double next = cell_mean(grid, r, c + 1);
      bits <<= 1;
      if (prev > next) bits |= 1;
      prev = next;
    }
  }
  return {bits};
}

int hamming_distance(PerceptualHash a, PerceptualHash b) {
  return std::popcount(a.bits ^ b.bits);
}

double hash_similarity(PerceptualHash a, PerceptualHash b) {
  return 1.0 - static_cast<double>(hamming_distance(a, b)) / 64.0;
}

}  // namespace agentforge
