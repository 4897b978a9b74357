#pragma once

#include <cstdint>

namespace nc {

// splitmix64: tiny counter-friendly generator. Used wherever a drop or
// coefficient decision must be reproducible from (seed, index) alone,
// independent of call order or platform.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kSplitmixGamma = 0x9E3779B97F4A7C15ull;

// i-th value of the splitmix64 stream started at `seed`.
constexpr std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t index) {
    return splitmix64_mix(seed + (index + 1) * kSplitmixGamma);
}

// Deterministic sub-seed, e.g. one RNG stream per block id.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    return splitmix64_mix(base ^ splitmix64_mix(salt + kSplitmixGamma));
}

// uniform in [0,1) with 53 significant bits
constexpr double u64_to_unit(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

class Splitmix64 {
public:
    explicit Splitmix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += kSplitmixGamma;
        return splitmix64_mix(state_);
    }

    // one uniform byte per call
    std::uint8_t next_byte() {
        if (bytes_left_ == 0) {
            pool_ = next();
            bytes_left_ = 8;
        }
        std::uint8_t b = static_cast<std::uint8_t>(pool_ & 0xFF);
        pool_ >>= 8;
        --bytes_left_;
        return b;
    }

private:
    std::uint64_t state_;
    std::uint64_t pool_ = 0;
    int bytes_left_ = 0;
};

} // namespace nc
