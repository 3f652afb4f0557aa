#include <doctest.h>

#include <cmath>
#include <set>

#include "ppipw/errors.hpp"
#include "ppipw/rng.hpp"

using namespace ppipw;

TEST_CASE("standard normal moments at CLT tolerance") {
  RngStream stream(1, derive_stream_id(0, "moments"));
  const int n = 1000000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = stream.standard_normal();
    sum += x;
    sum_sq += x * x;
  }
  double mean = sum / n;
  double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.005);     // 3 sigma / sqrt(n) with margin
  CHECK(std::abs(var - 1.0) < 0.005);
}

TEST_CASE("same stream and call index give identical vectors") {
  RngStream a(77, 5), b(77, 5);
  auto va = a.standard_normal_vector(16);
  auto vb = b.standard_normal_vector(16);
  CHECK(va == vb);
  // Second call continues the sequence and differs from the first.
  CHECK(a.standard_normal_vector(16) != va);
}

TEST_CASE("distinct stream ids decorrelate") {
  RngStream a(77, 5), b(77, 6);
  auto va = a.standard_normal_vector(8);
  auto vb = b.standard_normal_vector(8);
  CHECK(va != vb);
}

TEST_CASE("bernoulli endpoints and frequency") {
  RngStream stream(1, derive_stream_id(1, "bernoulli"));
  for (int i = 0; i < 100; ++i) {
    CHECK(stream.bernoulli(0.0) == 0);
    CHECK(stream.bernoulli(1.0) == 1);
  }
  CHECK_THROWS_AS(stream.bernoulli(-0.1), InvalidInputError);
  CHECK_THROWS_AS(stream.bernoulli(1.1), InvalidInputError);

  const int n = 1000000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += stream.bernoulli(0.3);
  double freq = static_cast<double>(ones) / n;
  CHECK(std::abs(freq - 0.3) < 3.0 * std::sqrt(0.3 * 0.7 / n));
}

TEST_CASE("derive_stream_id separates trials and purposes") {
  std::set<std::uint64_t> ids;
  for (std::uint64_t trial = 0; trial < 100; ++trial)
    for (auto purpose : {"generate", "split", "weight-noise", "scalar-noise"})
      ids.insert(derive_stream_id(trial, purpose));
  CHECK(ids.size() == 400);
}

TEST_CASE("standard_normal_vector rejects d < 1") {
  RngStream stream(1, 1);
  CHECK_THROWS_AS(stream.standard_normal_vector(0), InvalidInputError);
}
