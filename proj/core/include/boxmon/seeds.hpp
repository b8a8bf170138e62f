#pragma once

#include <cstdint>
#include <string_view>

namespace boxmon {

/// SplitMix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x);

/// Child seed for (stream, index) under `master`:
///   splitmix64(splitmix64(master ^ fnv1a64(stream)) + index)
/// Streams are short names such as "train", "monitor", "sample", "solver".
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

std::uint64_t fnv1a64(std::string_view s);

}  // namespace boxmon
