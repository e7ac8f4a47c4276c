#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dai {

// Error categories map 1:1 onto CLI exit codes.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitSolve = 3;
inline constexpr int kExitConsistency = 4;

// SplitMix64 step, used to derive independent sub-seeds from one master seed
// so that e.g. the generation stream and the shuffle stream never collide.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace dai
