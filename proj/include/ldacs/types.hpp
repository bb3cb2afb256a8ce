#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace ldacs {

template <typename Scalar>
using Sample = std::complex<Scalar>;

/// Complex baseband stream, one entry per (oversampled) sample.
template <typename Scalar>
using Signal = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RealSignal = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using SignalXd = Signal<double>;
using SignalXf = Signal<float>;

using Index = Eigen::Index;
using Rng = std::mt19937_64;

/// splitmix64 finaliser; used to derive independent seeds from (seed, tag) pairs.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix_seed(mix_seed(seed) ^ (tag * 0xd1b54a32d192ed03ULL));
}

}  // namespace ldacs
