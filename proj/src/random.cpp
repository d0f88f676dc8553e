#include "dynet/random.hpp"

#include <cmath>

namespace dynet {

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed)
    : key_(mix64(seed))
    , engine_(key_)
{
}

Rng Rng::split(std::uint64_t stream_id) const
{
    Rng child(0);
    child.key_ = mix64(key_ ^ mix64(stream_id + 0x632be59bd9b4e019ULL));
    child.engine_.seed(child.key_);
    return child;
}

double Rng::uniform()
{
    // 53 random bits, shifted by half an ulp so 0 is never returned.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::exponential(double rate)
{
    return -std::log(uniform()) / rate;
}

std::uint64_t Rng::below(std::uint64_t bound)
{
    // Lemire's multiply-shift with rejection.
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(engine_()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

} // namespace dynet
