#pragma once

// Internal path-generation kernel shared by the OU simulator and the SPX
// pricer so both consume identical Gaussian draws for a given (seed, stream).

#include <cstdint>
#include <random>
#include <vector>

#include "quintic/ou_process.hpp"

namespace quintic::detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
    (void)splitmix64(state);
    return splitmix64(state);
}

// Per-interval decay factors and increment standard deviations on a grid.
struct OuStepCache {
    std::vector<double> decay;
    std::vector<double> sd;
};

inline OuStepCache make_step_cache(const OuSpec& spec, const std::vector<double>& times) {
    OuStepCache cache;
    const std::size_t n = times.empty() ? 0 : times.size() - 1;
    cache.decay.resize(n);
    cache.sd.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        cache.decay[i] = decay_factor(spec, times[i], times[i + 1]);
        cache.sd[i] = std::sqrt(conditional_variance(spec, times[i], times[i + 1]));
    }
    return cache;
}

// Walks the streams [begin, end). Stream s carries path s, or the antithetic
// pair {2s, 2s+1} where the odd path sees the negated draws. The visitor is
// called per step as visit(path, step, y, x_prev, x_next) with steps in order.
template <class Visitor>
void walk_streams(const OuStepCache& cache, bool antithetic, std::uint64_t seed,
                  std::size_t begin, std::size_t end, Visitor&& visit) {
    const std::size_t n_steps = cache.decay.size();
    std::vector<double> scratch(n_steps);
    for (std::size_t s = begin; s < end; ++s) {
        std::mt19937_64 eng(substream_seed(seed, s));
        std::normal_distribution<double> normal;
        for (auto& y : scratch) y = normal(eng);
        const int reps = antithetic ? 2 : 1;
        for (int rep = 0; rep < reps; ++rep) {
            const double sign = rep ? -1.0 : 1.0;
            const std::size_t p = antithetic ? 2 * s + rep : s;
            double x = 0.0;
            for (std::size_t i = 0; i < n_steps; ++i) {
                const double y = sign * scratch[i];
                const double xn = x * cache.decay[i] + cache.sd[i] * y;
                visit(p, i, y, x, xn);
                x = xn;
            }
        }
    }
}

} // namespace quintic::detail
