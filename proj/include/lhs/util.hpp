// Shared plumbing: error types, environment knobs, static-partition parallel loop.
#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lhs {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// File missing, short read/write, bad permissions.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// A precondition on an operation's inputs does not hold.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

inline uint64_t env_seed(uint64_t fallback = 0) {
    if (const char* s = std::getenv("LHS_SEED")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(s, &end, 10);
        if (end && *end == '\0') return static_cast<uint64_t>(v);
    }
    return fallback;
}

inline int env_threads() {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw == 0 ? 1 : static_cast<int>(hw);
    if (const char* s = std::getenv("LHS_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(s, &end, 10);
        if (end && *end == '\0' && v > 0 && v < n) n = static_cast<int>(v);
    }
    return n;
}

// Runs fn(i) for i in [0, n). Work is split into contiguous ranges so the
// assignment of indices to ranges does not depend on the thread count.
template <typename Fn>
void parallel_for(size_t n, Fn&& fn, int threads = env_threads()) {
    if (n == 0) return;
    size_t t = static_cast<size_t>(threads < 1 ? 1 : threads);
    if (t > n) t = n;
    if (t == 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    size_t chunk = (n + t - 1) / t;
    for (size_t w = 0; w < t; ++w) {
        size_t lo = w * chunk;
        size_t hi = lo + chunk < n ? lo + chunk : n;
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace lhs
