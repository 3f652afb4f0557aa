#include "ppipw/rng.hpp"

#include "ppipw/errors.hpp"

namespace ppipw {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  // Mix seed and stream id into a full 312-word state via splitmix64, the
  // recommended way to seed mt19937_64 from small entropy.
  std::uint64_t s = splitmix64(seed ^ splitmix64(stream_id));
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::standard_normal() { return normal_(engine_); }

Eigen::VectorXd RngStream::standard_normal_vector(Eigen::Index d) {
  if (d < 1) throw InvalidInputError("standard_normal_vector: d must be >= 1");
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = normal_(engine_);
  return v;
}

int RngStream::bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidInputError("bernoulli: p must be in [0,1]");
  return uniform() < p ? 1 : 0;
}

double RngStream::uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

std::size_t RngStream::uniform_index(std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(engine_);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

std::uint64_t derive_stream_id(std::uint64_t trial_index, std::string_view purpose) {
  // FNV-1a over the purpose tag, then mixed with the trial index.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : purpose) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h ^ splitmix64(trial_index));
}

}  // namespace ppipw
