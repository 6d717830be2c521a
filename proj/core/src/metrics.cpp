#include "t1moco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "t1moco/deformation.hpp"
#include "t1moco/error.hpp"
#include "t1moco/signal_model.hpp"

namespace t1moco {

namespace {

void require_same_shape(const Mask& a, const Mask& b)
{
    if (!a.same_shape(b)) {
        throw Error(ErrorCode::ShapeMismatch, "masks differ in size");
    }
}

long count(const Mask& m)
{
    long n = 0;
    for (auto v : m.values()) n += v ? 1 : 0;
    return n;
}

double percentile(std::vector<double> values, double q)
{
    std::sort(values.begin(), values.end());
    // Linear interpolation between closest ranks.
    const double pos = q * (values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

// Squared distances from the boundary voxels of `from` to the boundary of `to`.
std::vector<double> directed_squared(const Mask& from_boundary, const Image& to_distance)
{
    std::vector<double> out;
    for (std::size_t p = 0; p < from_boundary.size(); ++p) {
        if (from_boundary[p]) out.push_back(to_distance[p]);
    }
    return out;
}

}  // namespace

double dice(const Mask& a, const Mask& b)
{
    require_same_shape(a, b);
    long inter = 0;
    long na = 0;
    long nb = 0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        const bool x = a[p] != 0;
        const bool y = b[p] != 0;
        inter += x && y;
        na += x;
        nb += y;
    }
    if (na + nb == 0) {
        return 1.0;
    }
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

Mask boundary(const Mask& mask)
{
    const int rows = mask.rows();
    const int cols = mask.cols();
    Mask out(rows, cols);
    auto off = [&](int r, int c) { return r < 0 || r >= rows || c < 0 || c >= cols || mask(r, c) == 0; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (mask(r, c) && (off(r - 1, c) || off(r + 1, c) || off(r, c - 1) || off(r, c + 1))) {
                out(r, c) = 1;
            }
        }
    }
    return out;
}

Image squared_distance_transform(const Mask& sites, Spacing spacing)
{
    const int rows = sites.rows();
    const int cols = sites.cols();
    constexpr double inf = std::numeric_limits<double>::infinity();

    // Pass 1: per row, the squared distance to the nearest site in that row.
    Image row_pass(rows, cols, inf);
    std::vector<int> nearest(cols);
    for (int r = 0; r < rows; ++r) {
        int last = -1;
        for (int c = 0; c < cols; ++c) {
            if (sites(r, c)) last = c;
            nearest[c] = last;
        }
        int next = -1;
        for (int c = cols - 1; c >= 0; --c) {
            if (sites(r, c)) next = c;
            int gap = -1;
            if (nearest[c] >= 0) gap = c - nearest[c];
            if (next >= 0 && (gap < 0 || next - c < gap)) gap = next - c;
            if (gap >= 0) {
                const double d = spacing.col_mm * gap;
                row_pass(r, c) = d * d;
            }
        }
    }
    // Pass 2: combine rows exhaustively per column.
    Image out(rows, cols, inf);
    for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) {
            double best = inf;
            for (int rr = 0; rr < rows; ++rr) {
                const double g = row_pass(rr, c);
                if (g == inf) continue;
                const double d = spacing.row_mm * (r - rr);
                best = std::min(best, d * d + g);
            }
            out(r, c) = best;
        }
    }
    return out;
}

double hausdorff(const Mask& a, const Mask& b, Spacing spacing, HausdorffMode mode)
{
    require_same_shape(a, b);
    if (count(a) == 0 || count(b) == 0) {
        throw Error(ErrorCode::EmptyMask, "hausdorff distance needs two non-empty masks");
    }
    const Mask ba = boundary(a);
    const Mask bb = boundary(b);
    const std::vector<double> ab = directed_squared(ba, squared_distance_transform(bb, spacing));
    const std::vector<double> ba_d = directed_squared(bb, squared_distance_transform(ba, spacing));
    if (mode == HausdorffMode::Maximum) {
        const double m = std::max(*std::max_element(ab.begin(), ab.end()), *std::max_element(ba_d.begin(), ba_d.end()));
        return std::sqrt(m);
    }
    auto distances = [](std::vector<double> squared) {
        for (double& v : squared) v = std::sqrt(v);
        return squared;
    };
    return std::max(percentile(distances(ab), 0.95), percentile(distances(ba_d), 0.95));
}

MaskSet warp_masks(const JointSolution& solution, const MaskSet& masks, int integration_steps)
{
    MaskSet out = masks;
    for (int i = 0; i < masks.size(); ++i) {
        if (!solution.fields.has_field(i)) continue;
        const Image warped = warp(masks.masks[i], integrate_velocity(solution.fields.field(i), integration_steps));
        for (std::size_t p = 0; p < warped.size(); ++p) {
            out.masks[i][p] = warped[p] >= 0.5 ? 1 : 0;
        }
    }
    return out;
}

std::pair<double, double> t1_rmse(const Image& estimate, const Image& truth, const Mask& region)
{
    if (!estimate.same_shape(truth) || !estimate.same_shape(region)) {
        throw Error(ErrorCode::ShapeMismatch, "t1 maps and region differ in size");
    }
    double abs_sq = 0.0;
    double rel_sq = 0.0;
    long n = 0;
    for (std::size_t p = 0; p < estimate.size(); ++p) {
        if (!region[p]) continue;
        const double d = estimate[p] - truth[p];
        abs_sq += d * d;
        rel_sq += (d / truth[p]) * (d / truth[p]);
        ++n;
    }
    if (n == 0) {
        throw Error(ErrorCode::EmptyMask, "t1 error region is empty");
    }
    return {std::sqrt(abs_sq / n), std::sqrt(rel_sq / n)};
}

EvalReport evaluate(const JointSolution& solution, const MaskSet& masks, const PhantomScene* truth,
                    const EvalOptions& options, int integration_steps)
{
    const ImageSeries& reg = solution.registered;
    validate_masks(masks, reg.size(), reg.rows(), reg.cols());
    if (solution.synthetic.size() != reg.size()) {
        throw Error(ErrorCode::ShapeMismatch, "solution has mismatched registered and synthetic series");
    }
    const int ref = solution.fields.reference_index();
    const Mask& fixed = masks.masks[ref];

    EvalReport report;
    const int n = reg.size();
    std::vector<double> observed(n);
    std::vector<double> predicted(n);
    std::vector<double> voxel_r2;
    double pooled_res = 0.0;
    std::vector<double> pooled_obs;
    for (std::size_t p = 0; p < fixed.size(); ++p) {
        if (!fixed[p]) continue;
        for (int i = 0; i < n; ++i) {
            observed[i] = reg.frames[i][p];
            predicted[i] = solution.synthetic.frames[i][p];
            pooled_res += (observed[i] - predicted[i]) * (observed[i] - predicted[i]);
            pooled_obs.push_back(observed[i]);
        }
        try {
            voxel_r2.push_back(r_squared(observed, predicted));
        } catch (const Error&) {
            // Flat voxel curves carry no R^2.
        }
    }
    if (options.pooled_r2) {
        double mean = 0.0;
        for (double v : pooled_obs) mean += v;
        mean /= std::max<std::size_t>(1, pooled_obs.size());
        double ss_tot = 0.0;
        for (double v : pooled_obs) ss_tot += (v - mean) * (v - mean);
        report.r2_mean = ss_tot > 0.0 ? 1.0 - pooled_res / ss_tot : 0.0;
        report.r2_std = 0.0;
        report.r2_voxels = static_cast<int>(pooled_obs.size() / std::max(1, n));
    } else if (!voxel_r2.empty()) {
        double mean = 0.0;
        for (double v : voxel_r2) mean += v;
        mean /= voxel_r2.size();
        double var = 0.0;
        for (double v : voxel_r2) var += (v - mean) * (v - mean);
        report.r2_mean = mean;
        report.r2_std = std::sqrt(var / voxel_r2.size());
        report.r2_voxels = static_cast<int>(voxel_r2.size());
    }

    const MaskSet warped = warp_masks(solution, masks, integration_steps);
    double dice_sum = 0.0;
    double hd_sum = 0.0;
    int hd_count = 0;
    for (int i = 0; i < n; ++i) {
        if (i == ref) continue;
        FrameEvaluation row;
        row.frame = i;
        row.dice = dice(warped.masks[i], fixed);
        if (count(warped.masks[i]) > 0 && count(fixed) > 0) {
            row.hausdorff_mm = hausdorff(warped.masks[i], fixed, reg.spacing, options.hausdorff_mode);
            hd_sum += *row.hausdorff_mm;
            ++hd_count;
        }
        dice_sum += row.dice;
        report.frames.push_back(row);
    }
    if (!report.frames.empty()) {
        report.dice_mean = dice_sum / report.frames.size();
    }
    if (hd_count > 0) {
        report.hausdorff_mm = hd_sum / hd_count;
    }

    if (truth) {
        const Mask& region = truth->truth_masks.masks[ref];
        const auto [abs_err, rel_err] = t1_rmse(solution.maps.t1, truth->truth_maps.t1, region);
        report.t1_rmse_ms = abs_err;
        report.t1_relative_rmse = rel_err;
    }
    return report;
}

}  // namespace t1moco
