#include "agentforge/embedding.hpp"

#include <cmath>
#include <cstring>

#include "agentforge/common.hpp"

namespace agentforge {

double dot(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size()) throw InvariantError("dot: dimension mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double l2_norm(const Embedding& v) {
  double acc = 0.0;
  for (float x : v) acc += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(acc);
}

double cosine(const Embedding& a, const Embedding& b) {
  double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw InvariantError("cosine: zero-norm embedding");
  return dot(a, b) / (na * nb);
}

void l2_normalize(Embedding& v) {
  double n = l2_norm(v);
  if (n == 0.0) throw InvariantError("l2_normalize: zero vector");
  for (float& x : v) x = static_cast<float>(static_cast<double>(x) / n);
}

Embedding normalized_mean(const std::vector<const Embedding*>& vectors) {
  if (vectors.empty()) throw InvariantError("normalized_mean: empty input");
  const size_t dim = vectors.front()->size();
  std::vector<double> acc(dim, 0.0);
  for (const Embedding* v : vectors) {
    if (v->size() != dim) throw InvariantError("normalized_mean: dimension mismatch");
    for (size_t i = 0; i < dim; ++i) acc[i] += static_cast<double>((*v)[i]);
  }
  Embedding out(dim);
  for (size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(acc[i] / static_cast<double>(vectors.size()));
  l2_normalize(out);
  return out;
}

namespace {

void put_u32le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t get_u32le(const std::string& in, size_t pos) {
  return static_cast<uint32_t>(static_cast<unsigned char>(in[pos])) |
         (static_cast<uint32_t>(static_cast<unsigned char>(in[pos + 1])) << 8) |
         (static_cast<uint32_t>(static_cast<unsigned char>(in[pos + 2])) << 16) |
         (static_cast<uint32_t>(static_cast<unsigned char>(in[pos + 3])) << 24);
}

}  // namespace

void save_embedding_matrix(const std::filesystem::path& path, const std::vector<Embedding>& rows, int dim) {
  if (dim <= 0) throw ValidationError("embedding matrix: dim must be positive");
  std::string blob = "AFIX";
  put_u32le(blob, 1);
  put_u32le(blob, static_cast<uint32_t>(rows.size()));
  put_u32le(blob, static_cast<uint32_t>(dim));
  blob.reserve(blob.size() + rows.size() * static_cast<size_t>(dim) * 4);
  for (const Embedding& row : rows) {
    if (static_cast<int>(row.size()) != dim) throw InvariantError("embedding matrix: row dimension mismatch");
    for (float x : row) {
      static_assert(sizeof(float) == 4);
      uint32_t bits;
      std::memcpy(&bits, &x, 4);
      put_u32le(blob, bits);
    }
  }
  write_text_file_atomic(path, blob);
}

std::vector<Embedding> load_embedding_matrix(const std::filesystem::path& path) {
  std::string blob = read_text_file(path);
  if (blob.size() < 16 || blob.compare(0, 4, "AFIX") != 0) {
    throw StoreError("embedding matrix: bad header in " + path.string());
  }
  uint32_t version = get_u32le(blob, 4);
  if (version != 1) throw StoreError("embedding matrix: unsupported version in " + path.string());
  uint32_t count = get_u32le(blob, 8);
  uint32_t dim = get_u32le(blob, 12);
  if (blob.size() != 16 + static_cast<size_t>(count) * dim * 4) {
    throw StoreError("embedding matrix: truncated file " + path.string());
  }
  std::vector<Embedding> rows(count, Embedding(dim));
  size_t pos = 16;
  for (uint32_t r = 0; r < count; ++r) {
    for (uint32_t c = 0; c < dim; ++c) {
      uint32_t bits = get_u32le(blob, pos);
      pos += 4;
      float x;
      std::memcpy(&x, &bits, 4);
      rows[r][static_cast<size_t>(c)] = x;
    }
  }
  return rows;
}

}  // namespace agentforge
