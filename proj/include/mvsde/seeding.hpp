#pragma once

#include <cstdint>

namespace mvsde {

/// splitmix64 finalizer.  Used to spread structured inputs (seed, stream
/// index, purpose tag) over 64 bits before feeding an engine.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream purposes.  Every consumer of randomness derives its own seed from
/// (base seed, purpose, index) so that streams never collide or overlap:
/// growing the particle count, adding repetitions, or reordering workers
/// leaves every existing stream untouched.
enum class StreamPurpose : std::uint64_t {
    Noise = 1,        ///< Brownian increments, index = particle
    InitialState = 2, ///< initial-condition draws, index = particle
    PicardIteration = 3, ///< per-iteration noise roots, index = iteration
    Repetition = 4,   ///< per-repetition roots in studies, index = repetition
    ReferenceFlow = 5, ///< the measure-flow solve backing a study
    Projection = 6,   ///< random directions for sliced transport distances
    Probe = 7         ///< test probes (finite differences, random points)
};

/// Derives an independent 64-bit seed from a base seed, a purpose tag and a
/// stream index.  Pure function of its inputs.
inline std::uint64_t derive_seed(std::uint64_t base, StreamPurpose purpose, std::uint64_t index) {
    std::uint64_t h = mix64(base ^ mix64(static_cast<std::uint64_t>(purpose)));
    return mix64(h ^ mix64(index));
}

} // namespace mvsde
