#pragma once

#include <cstdint>

#include "agentforge/env.hpp"

namespace agentforge {

struct PerceptualHash {
  uint64_t bits = 0;
  bool operator==(const PerceptualHash&) const = default;
};

// Difference hash: box-average the grayscale grid down to 9 columns x 8 rows,
// then bit (r, c) = 1 iff cell(r, c) > cell(r, c + 1), packed row-major from
// the most significant bit. Grids narrower/shorter than the target grid reuse
// single-pixel cells, so any non-empty grid hashes.
PerceptualHash perceptual_hash(const PixelGrid& grid);

int hamming_distance(PerceptualHash a, PerceptualHash b);

// 1 - hamming/64, in [0, 1]
double hash_similarity(PerceptualHash a, PerceptualHash b);

}  // namespace agentforge
