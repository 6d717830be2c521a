#include "t1moco/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace t1moco {

namespace {

int initial_thread_count()
{
    if (const char* env = std::getenv("T1MOCO_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) {
                return n;
            }
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::atomic<int>& thread_setting()
{
    static std::atomic<int> threads{initial_thread_count()};
    return threads;
}

}  // namespace

int thread_count() noexcept
{
    return thread_setting().load();
}

void set_thread_count(int threads)
{
    thread_setting().store(std::max(1, threads));
}

void parallel_rows(int rows, const std::function<void(int, int)>& fn)
{
    if (rows <= 0) {
        return;
    }
    const int workers = std::min(thread_count(), rows);
    if (workers <= 1 || rows < 8) {
        fn(0, rows);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(workers);
    pool.reserve(workers - 1);
    const int chunk = (rows + workers - 1) / workers;
    auto run = [&](int w) {
        const int begin = w * chunk;
        const int end = std::min(rows, begin + chunk);
        if (begin >= end) {
            return;
        }
        try {
            fn(begin, end);
        } catch (...) {
            failures[w] = std::current_exception();
        }
    };
    for (int w = 1; w < workers; ++w) {
        pool.emplace_back(run, w);
    }
    run(0);
    for (auto& t : pool) {
        t.join();
    }
    for (auto& f : failures) {
        if (f) {
            std::rethrow_exception(f);
        }
    }
}

double parallel_row_sum(int rows, const std::function<double(int)>& row_value)
{
    std::vector<double> partial(std::max(rows, 0), 0.0);
    parallel_rows(rows, [&](int begin, int end) {
        for (int r = begin; r < end; ++r) {
            partial[r] = row_value(r);
        }
    });
    double total = 0.0;
    for (double v : partial) {
        total += v;
    }
    return total;
}

}  // namespace t1moco
