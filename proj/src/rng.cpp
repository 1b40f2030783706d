#include "parlearn/rng.hpp"

namespace parlearn {

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) noexcept
{
    // FNV-1a over the label, then mixed with master and index.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(mix64(master ^ h) + mix64(index + 0x632be59bd9b4e019ULL));
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept
{
    if (bound <= 1)
        return 0;
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    if ((bound & (bound - 1)) == 0)
        return lo & (bound - 1);
    if (bound < (1ULL << 32)) {
        // (hi * 2^64 + lo) mod bound without 128-bit division.
        const std::uint64_t r64 = (0 - bound) % bound; // 2^64 mod bound
        return ((hi % bound) * r64 + lo % bound) % bound;
    }
    __extension__ using u128 = unsigned __int128;
    const u128 wide = (static_cast<u128>(hi) << 64) | lo;
    return static_cast<std::uint64_t>(wide % bound);
}

} // namespace parlearn
