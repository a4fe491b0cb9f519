#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace skillplan {

/// Independent generator for a named purpose ("dataset", "init", "grid",
/// "ucb", ...) derived from a run seed, so that adding draws to one purpose
/// never shifts another.
std::mt19937_64 substream(std::uint64_t seed, std::string_view name);

/// Seed value for a named purpose, for APIs that take a plain seed.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view name);

}  // namespace skillplan
