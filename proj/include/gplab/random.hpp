#pragma once

#include <cstdint>
#include <span>

namespace gplab {

// Seeded, splittable random source. The output sequence is a pure function
// of (master_seed, stream_id); distinct stream ids give statistically
// independent sequences. Value type: copy freely, but never share one
// instance between concurrent workers.
//
// Engine: xoshiro256++ seeded through splitmix64. Gaussian variates use the
// Marsaglia polar method, Poisson uses inversion below mean 30 and the PTRS
// transformed-rejection sampler above. These choices are frozen: changing
// any of them changes every downstream CSV byte.
class RandomStream {
public:
    RandomStream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t next_u64();

    // Uniform on [0, 1).
    double uniform01();

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Standard normal.
    double gaussian();

    void gaussian_fill(std::span<double> out);

    long long poisson(double lambda);

    // Uniformly distributed unit vector in R^d.
    void unit_vector(int d, double* out);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    std::uint64_t s_[4];
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gplab
