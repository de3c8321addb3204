// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "srif/povm.hpp"
#include "srif/scene.hpp"

namespace srif::oracle {

using gaussian::Cplx;

// Pinned generator stack: SplitMix64 for seeding, xoshiro256** for the
// stream. Integer arithmetic only, so identical seeds give identical
// streams on any platform; the floating-point draws inherit the platform's
// libm, which is stable within a build environment.

struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

struct Xoshiro256ss {
  std::uint64_t s[4];

  explicit Xoshiro256ss(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : s) word = sm.next();
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return (next() >> 11) * 0x1.0p-53; }

  /// Standard normal pair by Box-Muller.
  std::pair<double, double> normal_pair() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  }

  /// Exact Poisson draw by CDF inversion (sequential search).
  int poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda > 500.0)
      throw std::invalid_argument("poisson: mean out of supported range");
    const double u = uniform01();
    double pmf = std::exp(-lambda);
    double cdf = pmf;
    int k = 0;
    while (u >= cdf && k < 4096) {
      ++k;
      pmf *= lambda / k;
      cdf += pmf;
    }
    return k;
  }
};

/// Photon-count tallies from a Monte-Carlo run. Reproducible bit-exactly for
/// a fixed (seed, n_samples), independent of how many workers ran it.
struct SampleBatch {
  std::map<std::pair<int, int>, std::uint64_t> counts;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;

  double frequency(int m, int n) const {
    const auto it = counts.find({m, n});
    return it == counts.end()
               ? 0.0
               : static_cast<double>(it->second) / double(n_samples);
  }
};

namespace detail {

inline constexpr std::uint64_t chunk_size = 1u << 16;

inline Xoshiro256ss chunk_stream(std::uint64_t seed, std::uint64_t chunk) {
  return Xoshiro256ss(seed ^ (0x9E3779B97F4A7C15ULL * (chunk + 1)));
}

inline void sample_chunk(const scene::SceneParams& sc, double delta,
                         std::uint64_t seed, std::uint64_t chunk,
                         std::uint64_t count,
                         std::map<std::pair<int, int>, std::uint64_t>& out) {
  const auto ph = scene::phases_from_positions(sc);
  const double eps = sc.strength();
  const double sigma = std::sqrt(0.5 * eps);
  const Cplx e1c = std::exp(Cplx(0.0, -ph.phi1));
  const Cplx e2c = std::exp(Cplx(0.0, -ph.phi2));
  const Cplx ed = std::exp(Cplx(0.0, delta));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  Xoshiro256ss rng = chunk_stream(seed, chunk);
  for (std::uint64_t i = 0; i < count; ++i) {
    if (eps <= 0.0) {
      ++out[{0, 0}];
      continue;
    }
    const auto [g1, g2] = rng.normal_pair();
    const auto [g3, g4] = rng.normal_pair();
    const Cplx alpha1 = sigma * Cplx(g1, g2);
    const Cplx alpha2 = sigma * Cplx(g3, g4);
    const Cplx a1 = alpha1 + alpha2;
    const Cplx a2 = alpha1 * e1c + alpha2 * e2c;
    const Cplx b1 = (a1 + ed * a2) * inv_sqrt2;
    const Cplx b2 = (a1 - ed * a2) * inv_sqrt2;
    const int m = rng.poisson(std::norm(b1));
    const int n = rng.poisson(std::norm(b2));
    ++out[{m, n}];
  }
}

}  // namespace detail

/// Samples photon-count outcomes directly from the thermal coherent-state
/// mixture: conditional on the drawn amplitudes the telescope modes are
/// coherent, so the beam-splitter outputs give independent Poisson counts.
/// Sampling is split into fixed-size chunks with per-chunk streams; the
/// merged tally does not depend on the worker count.
inline SampleBatch sample_counts(const scene::SceneParams& sc, double delta,
                                 std::uint64_t n_samples, std::uint64_t seed,
                                 unsigned threads = 1) {
  SampleBatch batch;
  batch.n_samples = n_samples;
  batch.seed = seed;

  const std::uint64_t n_chunks =
      (n_samples + detail::chunk_size - 1) / detail::chunk_size;
  if (threads <= 1 || n_chunks <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
      const std::uint64_t count =
          std::min<std::uint64_t>(detail::chunk_size,
                                  n_samples - c * detail::chunk_size);
      detail::sample_chunk(sc, delta, seed, c, count, batch.counts);
    }
    return batch;
  }

  std::vector<std::map<std::pair<int, int>, std::uint64_t>> partial(threads);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::uint64_t c = t; c < n_chunks; c += threads) {
        const std::uint64_t count =
            std::min<std::uint64_t>(detail::chunk_size,
                                    n_samples - c * detail::chunk_size);
        detail::sample_chunk(sc, delta, seed, c, count, partial[t]);
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& part : partial)
    for (const auto& [key, value] : part) batch.counts[key] += value;
  return batch;
}

/// Relative frequencies over a window, with binomial standard errors and
/// the out-of-window mass in tail_mass.
inline povm::PhotonCountDistribution empirical_distribution(
    const SampleBatch& batch, int mmax, int nmax) {
  povm::PhotonCountDistribution dist;
  dist.probs = Eigen::MatrixXd::Zero(mmax + 1, nmax + 1);
  Eigen::MatrixXd se = Eigen::MatrixXd::Zero(mmax + 1, nmax + 1);
  const double n = static_cast<double>(batch.n_samples);
  std::uint64_t outside = 0;
  for (const auto& [key, value] : batch.counts) {
    if (key.first <= mmax && key.second <= nmax)
      dist.probs(key.first, key.second) = static_cast<double>(value) / n;
    else
      outside += value;
  }
  for (int m = 0; m <= mmax; ++m)
    for (int n_ = 0; n_ <= nmax; ++n_) {
      const double p = dist.probs(m, n_);
      se(m, n_) = std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
    }
  dist.tail_mass = static_cast<double>(outside) / n;
  dist.method = "monte-carlo";
  dist.std_error = se;
  return dist;
}

}  // namespace srif::oracle
