#include "subcap/random.hpp"

namespace subcap {

std::uint64_t CounterRng::mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t block, Stream stream)
{
    std::uint64_t k = mix(seed + golden);
    k = mix(k ^ (block + 0x632be59bd9b4e019ULL));
    k = mix(k ^ (static_cast<std::uint64_t>(stream) * 0x8cb92ba72f3d8dd7ULL));
    key_ = k;
}

} // namespace subcap
