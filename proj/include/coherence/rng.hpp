#ifndef COHERENCE_RNG_HPP
#define COHERENCE_RNG_HPP

#include <complex>
#include <cstdint>

namespace coherence {

// 64-bit mix used both as the SplitMix64 output function and for deriving
// substream states from (seed, index).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// SplitMix64 stream. Every Monte Carlo sample gets its own substream derived
// from (master seed, sample index), so results do not depend on how samples
// are distributed over worker threads.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : state_(mix64(seed + 0x9E3779B97F4A7C15ull)) {}

    static RandomStream substream(std::uint64_t master_seed, std::uint64_t index) {
        RandomStream s(0);
        s.state_ = mix64(mix64(master_seed) + 0x9E3779B97F4A7C15ull * (index + 1));
        return s;
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        return mix64(z);
    }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double uniform01_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    // One standard complex Gaussian: real and imaginary parts are independent
    // N(0,1), produced by a single Box-Muller transform.
    std::complex<double> complex_gauss() {
        const double r = std::sqrt(-2.0 * std::log(uniform01_open()));
        const double phi = 6.283185307179586476925286766559 * uniform01();
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    // One real N(0,1) variate (the sine half of the pair is discarded so the
    // stream position does not depend on caller pairing).
    double gauss() { return complex_gauss().real(); }

private:
    std::uint64_t state_;
};

} // namespace coherence

#endif
