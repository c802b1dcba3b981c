#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace thermopower {

/// Dense row-major H x W array. Rows and columns are zero-based here; the
/// "interior" of a grid is every cell that is not on the outer ring.
template <typename T>
class Grid {
public:
  Grid() = default;
  Grid(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), data_(height * width, fill) {}
  Grid(std::size_t height, std::size_t width, std::vector<T> values)
      : height_(height), width_(width), data_(std::move(values)) {
    assert(data_.size() == height_ * width_);
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t row, std::size_t col) {
    assert(row < height_ && col < width_);
    return data_[row * width_ + col];
  }
  const T& operator()(std::size_t row, std::size_t col) const {
    assert(row < height_ && col < width_);
    return data_[row * width_ + col];
  }

  bool is_interior(std::size_t row, std::size_t col) const {
    return row > 0 && col > 0 && row + 1 < height_ && col + 1 < width_;
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_shape(std::size_t height, std::size_t width) const {
    return height_ == height && width_ == width;
  }
  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return same_shape(other.height(), other.width());
  }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

}  // namespace thermopower
