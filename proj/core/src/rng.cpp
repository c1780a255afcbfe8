#include "varhmm/rng.hpp"

namespace varhmm {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  // Expand (seed, stream_id) into eight well-mixed words so nearby pairs
  // land in unrelated regions of the mt19937_64 state space.
  std::uint64_t x = splitmix64(seed) ^ splitmix64(stream_id ^ 0xD1B54A32D192ED03ULL);
  std::uint32_t words[8];
  for (int i = 0; i < 4; ++i) {
    x = splitmix64(x);
    words[2 * i] = static_cast<std::uint32_t>(x);
    words[2 * i + 1] = static_cast<std::uint32_t>(x >> 32);
  }
  std::seed_seq seq(words, words + 8);
  return std::mt19937_64(seq);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

RngStream RngStream::derive(std::uint64_t substream) const {
  return RngStream(seed_, splitmix64(stream_id_ ^ splitmix64(substream)));
}

RngStream RngStream::derive(std::string_view name) const { return derive(fnv1a64(name)); }

double RngStream::uniform() {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  return d(engine_);
}

double RngStream::normal() {
  std::normal_distribution<double> d(0.0, 1.0);
  return d(engine_);
}

}  // namespace varhmm
