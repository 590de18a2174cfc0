#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace frw {

// Counter-based generator (Philox4x32-10). A stream is identified by
// (seed, stream_id); draws are a pure function of that pair and the position
// in the stream, so any bootstrap replicate can be replayed on its own.
class Stream {
  public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Uniform on (0, 1]; never returns 0.
    double uniform_pos() noexcept;
    /// Uniform on [0, 1).
    double uniform() noexcept { return 1.0 - uniform_pos(); }
    /// Uniform on the open interval (0, 1).
    double uniform_open() noexcept;
    /// Unbiased integer on [0, n).
    std::uint64_t below(std::uint64_t n) noexcept;
    /// Unit-mean exponential by inversion, strictly positive.
    double exponential() noexcept;
    double normal() noexcept;

    /// Independent child stream; children with distinct ids never overlap.
    Stream child(std::uint64_t id) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

  private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    unsigned pos_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

} // namespace frw
