#pragma once

#include <functional>

namespace t1moco {

/// Worker count used by the row-parallel loops. Initialised from the
/// T1MOCO_THREADS environment variable, else the hardware concurrency.
int thread_count() noexcept;
void set_thread_count(int threads);

/// Runs fn(begin, end) over disjoint row ranges covering [0, rows).
/// Callers must only write state owned by their rows.
void parallel_rows(int rows, const std::function<void(int begin, int end)>& fn);

/// Sum of row_value(r) for r in [0, rows). Rows are evaluated in parallel
/// but accumulated serially in row order, so the result does not depend
/// on the worker count.
double parallel_row_sum(int rows, const std::function<double(int row)>& row_value);

}  // namespace t1moco
