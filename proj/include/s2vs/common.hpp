#pragma once

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "s2vs/errors.hpp"

namespace s2vs {

// ---------------------------------------------------------------------------
// Deterministic randomness.
//
// All stochastic ops draw from Rng. Distribution code is hand-rolled on top of
// mt19937_64 because the std::*_distribution mappings are
// implementation-defined; with a fixed seed the whole pipeline replays
// bit-identically on any conforming toolchain.
// ---------------------------------------------------------------------------
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [lo, hi] via rejection sampling.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        if (lo > hi) throw ConfigError("uniform_int: empty range");
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        if (span == 0) return static_cast<int64_t>(next_u64());  // full range
        uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return lo + static_cast<int64_t>(x % span);
    }

    // Uniform double in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return p > 0.0 && uniform() < p; }

    // Box-Muller; consumes two draws per pair, caching the second.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Child stream seeded from one draw; lets callers hand out independent
    // substreams whose identity does not depend on how much the child consumes.
    Rng fork() { return Rng(next_u64() ^ 0x9e3779b97f4a7c15ULL); }

    // Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::string serialize() const {
        std::ostringstream os;
        os << engine_ << ' ' << (have_spare_ ? 1 : 0) << ' ';
        os.precision(17);
        os << spare_;
        return os.str();
    }

    static Rng deserialize(const std::string& s) {
        Rng r;
        std::istringstream is(s);
        int spare_flag = 0;
        is >> r.engine_ >> spare_flag >> r.spare_;
        if (!is) throw FormatError("Rng::deserialize: malformed state string");
        r.have_spare_ = spare_flag != 0;
        return r;
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Worker pool.
//
// S2VS_NUM_WORKERS caps the thread count (default: hardware concurrency).
// Work is split into blocks whose boundaries depend only on the job size, and
// callers write results into disjoint per-index slots, so outputs are
// identical for every worker count.
// ---------------------------------------------------------------------------
inline int worker_count() {
    static int cached = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw < 1) hw = 1;
        const char* env = std::getenv("S2VS_NUM_WORKERS");
        if (!env || !*env) return hw;
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ConfigError(std::string("S2VS_NUM_WORKERS must be a positive integer, got '") + env + "'");
        return static_cast<int>(std::min<long>(v, hw));
    }();
    return cached;
}

namespace detail {

class WorkerPool {
public:
    static WorkerPool& instance() {
        static WorkerPool pool(worker_count() - 1);
        return pool;
    }

    // Runs f(i) for i in [0, n). Blocks until done. Not reentrant.
    void run(size_t n, const std::function<void(size_t)>& f) {
        if (n == 0) return;
        if (threads_.empty() || n == 1) {
            for (size_t i = 0; i < n; ++i) f(i);
            return;
        }
        std::unique_lock<std::mutex> lk(m_);
        job_ = &f;
        job_size_ = n;
        next_.store(0, std::memory_order_relaxed);
        pending_ = threads_.size();
        ++generation_;
        cv_start_.notify_all();
        lk.unlock();

        work();  // caller participates

        lk.lock();
        cv_done_.wait(lk, [&] { return pending_ == 0; });
        job_ = nullptr;
    }

    ~WorkerPool() {
        {
            std::lock_guard<std::mutex> lk(m_);
            stop_ = true;
            ++generation_;
        }
        cv_start_.notify_all();
        for (auto& t : threads_) t.join();
    }

private:
    explicit WorkerPool(int extra_threads) {
        for (int i = 0; i < extra_threads; ++i)
            threads_.emplace_back([this] { worker_loop(); });
    }

    void work() {
        const auto* f = job_;
        size_t n = job_size_;
        for (;;) {
            size_t i = next_.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) break;
            (*f)(i);
        }
    }

    void worker_loop() {
        uint64_t seen = 0;
        for (;;) {
            std::unique_lock<std::mutex> lk(m_);
            cv_start_.wait(lk, [&] { return generation_ != seen; });
            seen = generation_;
            if (stop_) return;
            lk.unlock();
            work();
            lk.lock();
            if (--pending_ == 0) cv_done_.notify_all();
        }
    }

    std::vector<std::thread> threads_;
    std::mutex m_;
    std::condition_variable cv_start_, cv_done_;
    const std::function<void(size_t)>* job_ = nullptr;
    size_t job_size_ = 0;
    std::atomic<size_t> next_{0};
    size_t pending_ = 0;
    uint64_t generation_ = 0;
    bool stop_ = false;
};

}  // namespace detail

// Runs f(i) for i in [0, n), possibly concurrently. f must only touch
// per-index state; ordering across indices is unspecified.
inline void parallel_for(size_t n, const std::function<void(size_t)>& f) {
    detail::WorkerPool::instance().run(n, f);
}

// ---------------------------------------------------------------------------
// Little-endian binary IO helpers (file formats are pinned little-endian).
// ---------------------------------------------------------------------------
inline void put_u32le(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64le(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32le(std::string& out, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32le(out, bits);
}

inline void put_f64le(std::string& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64le(out, bits);
}

class ByteReader {
public:
    ByteReader(const char* data, size_t size) : p_(data), end_(data + size) {}

    uint32_t u32le() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(p_[i])) << (8 * i);
        p_ += 4;
        return v;
    }

    uint64_t u64le() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(p_[i])) << (8 * i);
        p_ += 8;
        return v;
    }

    float f32le() {
        uint32_t bits = u32le();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    double f64le() {
        uint64_t bits = u64le();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    std::string bytes(size_t n) {
        need(n);
        std::string s(p_, n);
        p_ += n;
        return s;
    }

    size_t remaining() const { return static_cast<size_t>(end_ - p_); }

private:
    void need(size_t n) const {
        if (remaining() < n) throw FormatError("binary payload truncated");
    }

    const char* p_;
    const char* end_;
};

inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace s2vs
