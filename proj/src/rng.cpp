#include "spikelab/rng.hpp"

#include <cmath>

namespace spikelab {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Stream::Stream(std::uint64_t seed) : key_(mix64(seed + kGolden)) {}

Stream Stream::derive(std::uint64_t master_seed, std::uint64_t a) {
  return Stream(mix64(master_seed + kGolden) ^ mix64(a * 0xd1b54a32d192ed03ULL + 1));
}

Stream Stream::derive(std::uint64_t master_seed, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t k = mix64(master_seed + kGolden) ^ mix64(a * 0xd1b54a32d192ed03ULL + 1);
  return Stream(mix64(k) ^ mix64(b * 0xaef17502108ef2d9ULL + 3));
}

Stream::result_type Stream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double Stream::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * m;
  has_spare_ = true;
  return u * m;
}

double Stream::sign() { return ((*this)() >> 63) ? 1.0 : -1.0; }

}  // namespace spikelab
