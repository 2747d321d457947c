#include "rfpca/random.hpp"

namespace rfpca {

std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = mix64(seed + 0x9E3779B97F4A7C15ULL);
    for (std::uint64_t label : path) {
        key = mix64(key ^ mix64(label + 0x632BE59BD9B4E019ULL));
    }
    return key;
}

Vector gaussian_vector(StreamRng& rng, Index n, double scale) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) {
        v(i) = scale * rng.normal();
    }
    return v;
}

} // namespace rfpca
