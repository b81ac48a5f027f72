#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace afkit {

// Counter-based generator: draw i of stream s under seed k is a pure function
// of (k, s, i). Datasets, weight inits and dropout masks replay exactly across
// runs and platforms, and independent streams can be handed to independent
// consumers without interleaving.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    // splitmix64 finalizer over (seed, stream, counter)
    static uint64_t hash(uint64_t seed, uint64_t stream, uint64_t counter) {
        uint64_t x = seed;
        x += 0x9E3779B97F4A7C15ULL * (stream + 0x632BE59BD9B4E019ULL);
        x += 0xBF58476D1CE4E5B9ULL * (counter + 1);
        x ^= x >> 30;
        x *= 0xBF58476D1CE4E5B9ULL;
        x ^= x >> 27;
        x *= 0x94D049BB133111EBULL;
        x ^= x >> 31;
        return x;
    }

    uint64_t next_u64() { return hash(seed_, stream_, counter_++); }

    // uniform in (0,1): 53 random bits, offset so 0 is never produced
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // standard normal via Box-Muller; the trig form consumes exactly two
    // uniforms per pair, keeping the counter advance input-independent
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // unbiased-enough integer in [0, n): Lemire multiply-shift
    uint64_t below(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // derive an independent stream, e.g. one per record or per epoch
    Rng fork(uint64_t substream) const {
        return Rng(hash(seed_, stream_, 0xF0F0F0F0F0F0F0F0ULL), substream);
    }

    uint64_t seed() const { return seed_; }

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace afkit
