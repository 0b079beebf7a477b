#pragma once

#include <cstdint>
#include <random>

namespace icpovm {

/// Deterministic random stream keyed by (seed, stream_id). Identical keys
/// reproduce identical sequences bit-exactly; parallel tasks each take their
/// own stream (typically stream_id = repetition index).
class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_id_(stream_id) {
        std::seed_seq seq{
            static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
            static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Fresh stream derived from the same master seed.
    SeededRng stream(std::uint64_t id) const { return SeededRng(seed_, id); }

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    double gaussian() { return gauss_(engine_); }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> gauss_;
};

}  // namespace icpovm
