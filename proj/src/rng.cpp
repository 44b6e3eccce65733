#include "mlmc_seis/rng.hpp"

#include <cmath>
#include <numbers>

namespace mlmcseis {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t SampleKey::digest() const {
  std::uint64_t h = splitmix64(run);
  h = splitmix64(h ^ static_cast<std::uint64_t>(level + 1) * 0xD1B54A32D192ED03ULL);
  h = splitmix64(h ^ index);
  return h;
}

std::uint64_t run_id(std::uint64_t base_seed, const std::string& tag) {
  // FNV-1a over the tag, folded with the base seed.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix64(base_seed ^ splitmix64(h));
}

KeyedStream::result_type KeyedStream::operator()() {
  return splitmix64(key_ + kGolden * (++counter_));
}

double KeyedStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double KeyedStream::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace mlmcseis
