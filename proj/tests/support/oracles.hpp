#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "t1moco/grid.hpp"
#include "t1moco/series.hpp"

// Brute-force reference implementations, written for clarity only.
namespace t1moco::testing {

inline double brute_dice(const Mask& a, const Mask& b)
{
    double inter = 0, na = 0, nb = 0;
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) {
            inter += (a(r, c) && b(r, c)) ? 1 : 0;
            na += a(r, c) ? 1 : 0;
            nb += b(r, c) ? 1 : 0;
        }
    }
    return na + nb == 0 ? 1.0 : 2.0 * inter / (na + nb);
}

struct Point {
    int r, c;
};

inline std::vector<Point> brute_boundary(const Mask& m)
{
    std::vector<Point> out;
    const int dr[] = {-1, 1, 0, 0};
    const int dc[] = {0, 0, -1, 1};
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            if (!m(r, c)) continue;
            bool edge = false;
            for (int k = 0; k < 4; ++k) {
                const int rr = r + dr[k], cc = c + dc[k];
                if (rr < 0 || cc < 0 || rr >= m.rows() || cc >= m.cols() || !m(rr, cc)) edge = true;
            }
            if (edge) out.push_back({r, c});
        }
    }
    return out;
}

// Distances from each point of `from` to its nearest point of `to`.
inline std::vector<double> brute_directed(const std::vector<Point>& from, const std::vector<Point>& to, Spacing s)
{
    std::vector<double> out;
    for (const Point& p : from) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point& q : to) {
            const double y = s.row_mm * (p.r - q.r);
            const double x = s.col_mm * (p.c - q.c);
            best = std::min(best, y * y + x * x);
        }
        out.push_back(std::sqrt(best));
    }
    return out;
}

inline double brute_hausdorff(const Mask& a, const Mask& b, Spacing s)
{
    const auto ba = brute_boundary(a), bb = brute_boundary(b);
    double worst = 0.0;
    for (double d : brute_directed(ba, bb, s)) worst = std::max(worst, d);
    for (double d : brute_directed(bb, ba, s)) worst = std::max(worst, d);
    return worst;
}

inline double brute_percentile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = q * (v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

inline double brute_hausdorff95(const Mask& a, const Mask& b, Spacing s)
{
    const auto ba = brute_boundary(a), bb = brute_boundary(b);
    return std::max(brute_percentile(brute_directed(ba, bb, s), 0.95),
                    brute_percentile(brute_directed(bb, ba, s), 0.95));
}

inline bool any(const Mask& m)
{
    for (auto v : m.values()) {
        if (v) return true;
    }
    return false;
}

}  // namespace t1moco::testing
