#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace eamat {

using Real = double;
using Index = Eigen::Index;
using Shape = std::vector<Index>;

using ArrayX = Eigen::ArrayX<Real>;
using VectorX = Eigen::VectorX<Real>;
using MatrixRM = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<MatrixRM>;
using CMatMap = Eigen::Map<const MatrixRM>;

/// Shape/extent mismatch between operands; message names both shapes.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration (divisibility, ranges, unknown keys).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Bad runtime input (empty dataset, out-of-range index, unreadable file).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Violated API contract (non-scalar loss, tensor outside a live graph).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

inline Index numel(const Shape& s) {
  Index n = 1;
  for (Index e : s) n *= e;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << 'x';
    os << s[i];
  }
  os << ']';
  return os.str();
}

/// Deterministic RNG. All randomness in the project flows through this so
/// that seeds reproduce byte-identical runs across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  Real uniform(Real lo, Real hi) {
    const Real u = static_cast<Real>(next() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  /// Uniform integer in [0, n), rejection-sampled.
  Index uniform_index(Index n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return static_cast<Index>(r % un);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (Index i = static_cast<Index>(v.size()) - 1; i > 0; --i) {
      std::swap(v[i], v[uniform_index(i + 1)]);
    }
  }

  /// Stream partitioning: derive an independent seed from (seed, stream, counter).
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
    std::uint64_t x = a + 0x9e3779b97f4a7c15ULL * (b + 1) + 0xbf58476d1ce4e5b9ULL * (c + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace eamat
