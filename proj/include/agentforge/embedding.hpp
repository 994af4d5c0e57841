#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace agentforge {

using Embedding = std::vector<float>;

// dot product with double accumulation, in index order
double dot(const Embedding& a, const Embedding& b);
double l2_norm(const Embedding& v);
// cosine similarity; zero-norm inputs are an invariant violation
double cosine(const Embedding& a, const Embedding& b);
// scales v to unit norm in place; throws on the zero vector
void l2_normalize(Embedding& v);
// renormalized mean of unit vectors (e.g. a screen's functionality centroid)
Embedding normalized_mean(const std::vector<const Embedding*>& vectors);

// Binary matrix file: 16-byte header (magic "AFIX", version u32, count u32,
// dim u32, all little-endian) followed by count*dim little-endian f32 values.
void save_embedding_matrix(const std::filesystem::path& path, const std::vector<Embedding>& rows, int dim);
std::vector<Embedding> load_embedding_matrix(const std::filesystem::path& path);

}  // namespace agentforge
