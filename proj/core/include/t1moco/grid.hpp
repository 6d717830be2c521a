#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace t1moco {

/// Row-major 2D array. Rows index the first (slow) axis.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid() = default;
    Grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill)
    {
        assert(rows >= 0 && cols >= 0);
    }

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int r, int c) noexcept { return data_[index(r, c)]; }
    const T& operator()(int r, int c) const noexcept { return data_[index(r, c)]; }

    T& operator[](std::size_t i) noexcept { return data_[i]; }
    const T& operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<T> values() noexcept { return data_; }
    std::span<const T> values() const noexcept { return data_; }

    template <typename U>
    bool same_shape(const Grid<U>& other) const noexcept
    {
        return rows_ == other.rows() && cols_ == other.cols();
    }

    bool operator==(const Grid&) const = default;

private:
    std::size_t index(int r, int c) const noexcept
    {
        assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
        return static_cast<std::size_t>(r) * cols_ + c;
    }

    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using Image = Grid<double>;
using Mask = Grid<std::uint8_t>;

struct Vec2 {
    double row = 0.0;
    double col = 0.0;

    bool operator==(const Vec2&) const = default;
};

/// H x W x 2 field of (row, col) components in voxel units, interleaved.
class VectorField {
public:
    VectorField() = default;
    VectorField(int rows, int cols) : rows_(rows), cols_(cols), data_(2 * static_cast<std::size_t>(rows) * cols, 0.0) {}

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t voxels() const noexcept { return static_cast<std::size_t>(rows_) * cols_; }

    /// k = 0 is the row component, k = 1 the column component.
    double& at(int r, int c, int k) noexcept { return data_[2 * (static_cast<std::size_t>(r) * cols_ + c) + k]; }
    double at(int r, int c, int k) const noexcept { return data_[2 * (static_cast<std::size_t>(r) * cols_ + c) + k]; }

    Vec2 operator()(int r, int c) const noexcept { return {at(r, c, 0), at(r, c, 1)}; }
    void set(int r, int c, Vec2 v) noexcept
    {
        at(r, c, 0) = v.row;
        at(r, c, 1) = v.col;
    }

    std::span<double> components() noexcept { return data_; }
    std::span<const double> components() const noexcept { return data_; }

    template <typename U>
    bool same_shape(const Grid<U>& g) const noexcept
    {
        return rows_ == g.rows() && cols_ == g.cols();
    }
    bool same_shape(const VectorField& f) const noexcept { return rows_ == f.rows_ && cols_ == f.cols_; }

    bool operator==(const VectorField&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

}  // namespace t1moco
