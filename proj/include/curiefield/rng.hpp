#ifndef CURIEFIELD_RNG_HPP
#define CURIEFIELD_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace curiefield {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// A stream is identified by a 64-bit key and the upper 64 bits of the
// counter; the lower 64 bits count 128-bit blocks inside the stream. Two
// streams with different (key, stream id) never overlap, so replicas can be
// generated in any order on any worker and still produce identical draws.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32() = default;
  Philox4x32(std::uint64_t key, std::uint64_t stream_id)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        stream_hi_(stream_id) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (buffered_ == 0) {
      refill();
    }
    --buffered_;
    return buffer_[buffered_];
  }

  // Advance by `blocks` 128-bit blocks (two outputs each).
  void discard_blocks(std::uint64_t blocks) {
    block_ += blocks;
    buffered_ = 0;
  }

  std::uint64_t block_position() const { return block_; }

  static Counter bijection(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  void refill() {
    const Counter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                      static_cast<std::uint32_t>(stream_hi_),
                      static_cast<std::uint32_t>(stream_hi_ >> 32)};
    const Counter out = bijection(ctr, key_);
    ++block_;
    // Served back to front by operator().
    buffer_[1] = (std::uint64_t{out[1]} << 32) | out[0];
    buffer_[0] = (std::uint64_t{out[3]} << 32) | out[2];
    buffered_ = 2;
  }

  Key key_{0, 0};
  std::uint64_t stream_hi_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Named substreams. Every random quantity of a replica is drawn from its own
// substream so that adding draws to one never shifts another.
enum class Substream : std::uint32_t {
  randomisation = 1,
  uniforms = 2,
  gaussian = 3,
  auxiliary = 4,
  mcmc = 5,
  calibration = 6,
};

// Stream for (experiment seed, substream, replica index).
inline Philox4x32 make_stream(std::uint64_t seed, Substream substream, std::uint64_t replica) {
  const std::uint64_t key =
      splitmix64(splitmix64(seed) ^ (std::uint64_t{static_cast<std::uint32_t>(substream)} << 56));
  return Philox4x32(key, replica);
}

// Uniform on the open interval (0,1) with 53 random bits.
template <class Rng>
double uniform_open(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace curiefield

#endif  // CURIEFIELD_RNG_HPP
