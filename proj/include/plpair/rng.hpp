// Deterministic random-number substreams.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace plpair {

using Rng = std::mt19937_64;

/// Engine for the substream identified by `path` (e.g. {point, chunk}) under
/// `master_seed`. Distinct paths give statistically independent engines; the
/// same (seed, path) always gives the same engine state.
Rng make_substream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path);

/// Fresh seed from std::random_device, for runs without an explicit seed.
std::uint64_t entropy_seed();

}  // namespace plpair
