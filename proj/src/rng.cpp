#include "frw/rng.hpp"

#include <cmath>
#include <numbers>

namespace frw {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
        std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
        std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
        std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept : seed_(seed), stream_id_(stream_id) {}

void Stream::refill() noexcept {
    std::array<std::uint32_t, 4> ctr{std::uint32_t(block_), std::uint32_t(block_ >> 32), std::uint32_t(stream_id_),
                                     std::uint32_t(stream_id_ >> 32)};
    buf_ = philox(ctr, {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
    ++block_;
    pos_ = 0;
}

Stream::result_type Stream::operator()() noexcept {
    if (pos_ > 2) {
        refill();
    }
    std::uint64_t hi = buf_[pos_], lo = buf_[pos_ + 1];
    pos_ += 2;
    return (hi << 32) | lo;
}

double Stream::uniform_pos() noexcept {
    // (k + 1) * 2^-53 with k in [0, 2^53): the smallest value is 2^-53.
    return double(((*this)() >> 11) + 1) * 0x1.0p-53;
}

std::uint64_t Stream::below(std::uint64_t n) noexcept {
    // Lemire's multiply-shift with rejection.
    __extension__ using u128 = unsigned __int128;
    u128 m = u128((*this)()) * n;
    auto low = std::uint64_t(m);
    if (low < n) {
        std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = u128((*this)()) * n;
            low = std::uint64_t(m);
        }
    }
    return std::uint64_t(m >> 64);
}

double Stream::uniform_open() noexcept { return (double((*this)() >> 11) + 0.5) * 0x1.0p-53; }

// -log(U) with U < 1 strictly, so the draw is never 0.
double Stream::exponential() noexcept { return -std::log(uniform_open()); }

double Stream::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    double a = 2.0 * std::numbers::pi * uniform();
    spare_normal_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

Stream Stream::child(std::uint64_t id) const noexcept {
    return Stream(splitmix(seed_ ^ splitmix(stream_id_ + 0x632BE59BD9B4E019ull)), id);
}

} // namespace frw
