#pragma once

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace uwmarl {

/// Thrown for invalid user-supplied configuration (bad dimensions, flags, files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A cell index on the survey grid. Rows follow y (row 0 touches the origin),
/// columns follow x. Actions use matrix orientation: Up decreases the row.
struct GridPos {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const GridPos&, const GridPos&) = default;
};

/// Geometry of the rectangular survey region and its M x N partition.
struct GridSpec {
  int rows = 0;
  int cols = 0;
  double width = 0.0;   // meters, east-west extent
  double height = 0.0;  // meters, north-south extent

  /// Throws ConfigError unless all four fields are strictly positive and finite.
  void validate() const;

  [[nodiscard]] double cell_width() const { return width / cols; }
  [[nodiscard]] double cell_height() const { return height / rows; }
  [[nodiscard]] double cell_area() const { return cell_width() * cell_height(); }
  [[nodiscard]] int cell_count() const { return rows * cols; }

  /// Center of a cell in region-local meters (x east, y north of the origin).
  [[nodiscard]] double center_x(const GridPos& p) const { return (p.col + 0.5) * cell_width(); }
  [[nodiscard]] double center_y(const GridPos& p) const { return (p.row + 0.5) * cell_height(); }
};

/// Dense row-major 2-D array.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, const T& fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(checked(rows) * checked(cols)), fill) {}

  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  [[nodiscard]] bool contains(const GridPos& p) const {
    return p.row >= 0 && p.row < rows_ && p.col >= 0 && p.col < cols_;
  }
  [[nodiscard]] std::size_t index(const GridPos& p) const {
    return static_cast<std::size_t>(p.row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(p.col);
  }
  [[nodiscard]] GridPos pos(std::size_t i) const {
    return {static_cast<int>(i / static_cast<std::size_t>(cols_)), static_cast<int>(i % static_cast<std::size_t>(cols_))};
  }

  T& operator[](const GridPos& p) { return data_[index(p)]; }
  const T& operator[](const GridPos& p) const { return data_[index(p)]; }
  T& at(int r, int c) { return data_.at(index({r, c})); }
  const T& at(int r, int c) const { return data_.at(index({r, c})); }

  [[nodiscard]] std::vector<T>& values() { return data_; }
  [[nodiscard]] const std::vector<T>& values() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static int checked(int n) {
    if (n < 0) throw std::invalid_argument("Grid dimension must be non-negative");
    return n;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

std::string to_string(const GridPos& p);

}  // namespace uwmarl
