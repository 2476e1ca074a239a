#include "ms2d/common.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>
#include <vector>

namespace ms2d {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

void parallel_for(size_t n, int threads, const std::function<void(size_t, size_t)>& fn) {
    if (n == 0) return;
    int t = resolve_threads(threads);
    if (t <= 1 || n == 1) {
        fn(0, n);
        return;
    }
    size_t nt = std::min<size_t>(size_t(t), n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    size_t chunk = n / nt, rem = n % nt;
    size_t begin = 0;
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::vector<std::pair<size_t, size_t>> ranges;
    for (size_t k = 0; k < nt; ++k) {
        size_t len = chunk + (k < rem ? 1 : 0);
        ranges.emplace_back(begin, begin + len);
        begin += len;
    }
    std::mutex err_mx;
    for (auto [b, e] : ranges) {
        pool.emplace_back([&, b, e] {
            try {
                fn(b, e);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mx);
                if (!failed.exchange(true)) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed) std::rethrow_exception(err);
}

double GaussRng::next() {
    if (have_spare) {
        have_spare = false;
        return spare;
    }
    double u1 = u.uniform();
    double u2 = u.uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare = r * std::sin(a);
    have_spare = true;
    return r * std::cos(a);
}

namespace mem {

namespace {
std::atomic<size_t> g_current{0};
std::atomic<size_t> g_high{0};
} // namespace

void track(size_t bytes) {
    size_t now = g_current.fetch_add(bytes) + bytes;
    size_t hw = g_high.load();
    while (now > hw && !g_high.compare_exchange_weak(hw, now)) {}
}

void untrack(size_t bytes) { g_current.fetch_sub(bytes); }
size_t current() { return g_current.load(); }
size_t high_water() { return g_high.load(); }
void reset_high_water() { g_high.store(g_current.load()); }

} // namespace mem

} // namespace ms2d
