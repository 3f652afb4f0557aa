#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace ppipw {

/// Deterministic random stream identified by (seed, stream_id).
///
/// Every stochastic operation in the pipeline owns exactly one stream, so the
/// whole output is a pure function of the master seed and the configuration.
/// Distinct stream ids derived from the same seed give independent sequences.
///
/// Not cryptographically secure; this artifact studies estimator utility, not
/// a hardened DP release mechanism.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// One standard-normal draw.
  double standard_normal();

  /// d iid standard-normal draws.
  Eigen::VectorXd standard_normal_vector(Eigen::Index d);

  /// 1 with probability p. Throws InvalidInputError if p is outside [0,1].
  int bernoulli(double p);

  /// Uniform draw in [0,1).
  double uniform();

  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);

  /// Uniform random permutation of 0..n-1 (Fisher-Yates).
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Stream id for (trial, purpose); collision-resistant across the harness so
/// a trial never reuses noise drawn for another purpose.
std::uint64_t derive_stream_id(std::uint64_t trial_index, std::string_view purpose);

}  // namespace ppipw
