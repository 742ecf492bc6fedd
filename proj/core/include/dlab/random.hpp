#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace dlab {

// Seeded generator whose derived variates are computed here rather than by the
// standard distributions, so streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();                       // [0, 1)
    std::size_t below(std::size_t bound);   // [0, bound)
    double normal();                        // Box-Muller
    std::complex<double> complex_normal();  // independent N(0,1) parts
    double phase();                         // [0, 2*pi)

private:
    std::mt19937_64 engine_;
};

// Mixes a base seed with a stream label so per-scale streams are independent.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t label);

}  // namespace dlab
