#pragma once

#include <cstdint>
#include <initializer_list>

namespace peerperf {

// Counter-based generator: output t = mix(key ^ mix(counter)). Every draw is a
// pure function of (key, counter), so independent streams keyed on
// (seed, month, group, firm, ...) give schedule-invariant results under any
// parallel execution order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    // Two rounds of the splitmix64 finalizer.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Derive a stream key from a root seed and a path of stream ids.
    static std::uint64_t derive_key(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) {
        std::uint64_t k = mix(seed);
        for (std::uint64_t id : path) k = mix(k ^ mix(id + 0x6a09e667f3bcc909ULL));
        return k;
    }

    std::uint64_t next_u64() { return mix(key_ ^ mix(counter_++)); }

    // Uniform on (0,1), never returns an endpoint.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::uint64_t uniform_below(std::uint64_t n) { return next_u64() % n; }

    double normal();  // standard normal via inverse CDF

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace peerperf
