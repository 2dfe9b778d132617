#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sbmoo/errors.hpp"

namespace sbmoo {

/// Row-major set of d-dimensional points.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t d) : d_(d) {}
    PointSet(std::size_t d, std::vector<double> data) : d_(d), data_(std::move(data)) {
        if (d_ == 0 || data_.size() % d_ != 0) throw InputError("PointSet: data size not a multiple of d");
    }

    std::size_t dim() const noexcept { return d_; }
    std::size_t size() const noexcept { return d_ == 0 ? 0 : data_.size() / d_; }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const double> operator[](std::size_t i) const { return {data_.data() + i * d_, d_}; }
    std::span<double> operator[](std::size_t i) { return {data_.data() + i * d_, d_}; }

    void push_back(std::span<const double> x) {
        if (d_ == 0) d_ = x.size();
        if (x.size() != d_) throw InputError("PointSet: dimension mismatch");
        data_.insert(data_.end(), x.begin(), x.end());
    }
    void reserve(std::size_t n) { data_.reserve(n * d_); }
    void clear() noexcept { data_.clear(); }

    /// All coordinates of all points, flattened.
    std::span<const double> coordinates() const noexcept { return data_; }

    /// Coordinate j of every point.
    std::vector<double> column(std::size_t j) const {
        std::vector<double> out;
        out.reserve(size());
        for (std::size_t i = 0; i < size(); ++i) out.push_back(data_[i * d_ + j]);
        return out;
    }

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    std::size_t d_ = 0;
    std::vector<double> data_;
};

}  // namespace sbmoo
