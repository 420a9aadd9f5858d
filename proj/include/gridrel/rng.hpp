#pragma once

#include <cstdint>
#include <random>

namespace gridrel {

// Splittable seeding: every (master_seed, iteration, stream) triple yields an
// independent engine, so results do not depend on how iterations are scheduled
// across worker threads.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t iteration, std::uint64_t stream) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ (iteration * 0x9e3779b97f4a7c15ULL));
    h = splitmix64(h ^ (stream * 0xd1b54a32d192ed03ULL));
    return h;
}

// Stream ids used by the simulation engine. Failure draws live on their own
// stream so that controller-mode or battery-policy differences never shift the
// failure history between otherwise identical runs.
enum : std::uint64_t {
    stream_failures = 0,
    stream_battery_soc = 1,
    stream_profiles = 2,
};

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t iteration, std::uint64_t stream) {
    return std::mt19937_64(mix_seed(master, iteration, stream));
}

}  // namespace gridrel
