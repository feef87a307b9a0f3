#include "plpair/rng.hpp"

#include <vector>

namespace plpair {

Rng make_substream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path)
{
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * path.size() + 1);
    auto push64 = [&](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push64(master_seed);
    // Path length is mixed in so {a} and {a, 0} differ.
    words.push_back(static_cast<std::uint32_t>(path.size()));
    for (auto v : path) {
        push64(v);
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

std::uint64_t entropy_seed()
{
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace plpair
