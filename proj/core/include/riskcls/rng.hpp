#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace riskcls {

using Rng = std::mt19937_64;

// Mixes a base seed with a stream index (splitmix64 finalizer) so that
// derived streams are decorrelated and reproducible.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

// Stable 64-bit FNV-1a hash; used to key per-user seeds by user id.
std::uint64_t stable_hash(std::string_view text) noexcept;

// Uniform index in [0, n). n must be > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);

// k distinct indices from [0, n), uniformly, in draw order (partial
// Fisher-Yates). Requires k <= n.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

// Same draw, sorted ascending.
std::vector<std::size_t> sample_sorted(Rng& rng, std::size_t n, std::size_t k);

}  // namespace riskcls
