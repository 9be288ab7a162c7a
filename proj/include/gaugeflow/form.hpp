#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gaugeflow/grid.hpp"

namespace gaugeflow {

/// Shape of the value attached to each form component: m x m for matrix
/// forms, m x 1 for vector forms.
struct ValueShape {
  int rows = 1;
  int cols = 1;

  bool operator==(const ValueShape&) const = default;
  int entries() const { return rows * cols; }
};

/// A degree-k differential form on the torus with matrix or vector values.
///
/// Coefficients are stored component-major (components follow form_basis),
/// then value entry row-major, then grid point with axis 1 fastest. Each
/// (component, row, col) triple therefore owns one contiguous scalar field.
class Form {
 public:
  Form() = default;
  Form(Grid grid, int degree, ValueShape shape);

  static Form matrix(const Grid& grid, int degree, int m) { return {grid, degree, {m, m}}; }
  static Form vector(const Grid& grid, int degree, int m) { return {grid, degree, {m, 1}}; }
  /// Constant identity matrix 0-form.
  static Form identity(const Grid& grid, int m);

  const Grid& grid() const { return grid_; }
  int degree() const { return degree_; }
  ValueShape shape() const { return shape_; }
  int rows() const { return shape_.rows; }
  int cols() const { return shape_.cols; }
  int components() const { return components_; }
  std::size_t points() const { return grid_.points(); }
  /// Number of scalar fields, components * rows * cols.
  std::size_t scalar_fields() const { return static_cast<std::size_t>(components_) * shape_.entries(); }
  bool empty() const { return data_.empty(); }

  std::span<double> field(int comp, int r, int c);
  std::span<const double> field(int comp, int r, int c) const;
  std::span<double> field(std::size_t scalar) { return {data_.data() + scalar * points(), points()}; }
  std::span<const double> field(std::size_t scalar) const { return {data_.data() + scalar * points(), points()}; }

  double& at(int comp, int r, int c, std::size_t point) { return field(comp, r, c)[point]; }
  double at(int comp, int r, int c, std::size_t point) const { return field(comp, r, c)[point]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  /// Whether the values are flagged as antisymmetric matrices.
  bool skew() const { return skew_; }
  void mark_skew(bool flag) { skew_ = flag; }
  /// Replaces every value by its antisymmetric part, sets the skew flag and
  /// returns the largest |c^i_j + c^j_i| seen before the projection.
  double antisymmetrize();

  bool same_layout(const Form& other) const;

  Form& operator+=(const Form& other);
  Form& operator-=(const Form& other);
  Form& operator*=(double s);

 private:
  Grid grid_;
  int degree_ = 0;
  ValueShape shape_;
  int components_ = 0;
  bool skew_ = false;
  std::vector<double> data_;
};

Form operator+(Form a, const Form& b);
Form operator-(Form a, const Form& b);
Form operator*(double s, Form a);

/// Pointwise transpose of the matrix values.
Form transpose_values(const Form& f);

/// Pointwise magnitude: Frobenius norm of the value, then l2 over components.
std::vector<double> pointwise_norm(const Form& f);

/// Constant form holding the grid mean of every coefficient (the torus
/// harmonic part).
Form harmonic_part(const Form& f);

/// Largest absolute grid mean over all scalar coefficients.
double max_abs_mean(const Form& f);

/// Largest absolute coefficient.
double max_abs_entry(const Form& f);

}  // namespace gaugeflow
