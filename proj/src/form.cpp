#include "gaugeflow/form.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gaugeflow/error.hpp"

namespace gaugeflow {

Form::Form(Grid grid, int degree, ValueShape shape)
    : grid_(grid), degree_(degree), shape_(shape) {
  if (degree < 0 || degree > grid.dim()) {
    throw Error("form degree " + std::to_string(degree) + " outside [0, n]");
  }
  if (shape.rows < 1 || shape.cols < 1) throw Error("form value shape must be positive");
  components_ = binomial(grid.dim(), degree);
  data_.assign(scalar_fields() * grid.points(), 0.0);
}

Form Form::identity(const Grid& grid, int m) {
  Form f = matrix(grid, 0, m);
  for (int i = 0; i < m; ++i) std::ranges::fill(f.field(0, i, i), 1.0);
  return f;
}

std::span<double> Form::field(int comp, int r, int c) {
  return field((static_cast<std::size_t>(comp) * shape_.rows + r) * shape_.cols + c);
}

std::span<const double> Form::field(int comp, int r, int c) const {
  return field((static_cast<std::size_t>(comp) * shape_.rows + r) * shape_.cols + c);
}

double Form::antisymmetrize() {
  if (shape_.rows != shape_.cols) throw Error("antisymmetrize needs square values");
  double defect = 0.0;
  const int m = shape_.rows;
  for (int comp = 0; comp < components_; ++comp) {
    for (int i = 0; i < m; ++i) {
      auto diag = field(comp, i, i);
      for (double v : diag) defect = std::max(defect, 2.0 * std::abs(v));
      std::ranges::fill(diag, 0.0);
      for (int j = i + 1; j < m; ++j) {
        auto upper = field(comp, i, j);
        auto lower = field(comp, j, i);
        for (std::size_t p = 0; p < upper.size(); ++p) {
          defect = std::max(defect, std::abs(upper[p] + lower[p]));
          double s = 0.5 * (upper[p] - lower[p]);
          upper[p] = s;
          lower[p] = -s;
        }
      }
    }
  }
  skew_ = true;
  return defect;
}

bool Form::same_layout(const Form& other) const {
  return grid_ == other.grid_ && degree_ == other.degree_ && shape_ == other.shape_;
}

Form& Form::operator+=(const Form& other) {
  if (!same_layout(other)) throw Error("form layout mismatch in addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  skew_ = skew_ && other.skew_;
  return *this;
}

Form& Form::operator-=(const Form& other) {
  if (!same_layout(other)) throw Error("form layout mismatch in subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  skew_ = skew_ && other.skew_;
  return *this;
}

Form& Form::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Form operator+(Form a, const Form& b) { return a += b; }
Form operator-(Form a, const Form& b) { return a -= b; }
Form operator*(double s, Form a) { return a *= s; }

Form transpose_values(const Form& f) {
  Form out(f.grid(), f.degree(), {f.cols(), f.rows()});
  for (int comp = 0; comp < f.components(); ++comp) {
    for (int r = 0; r < f.rows(); ++r) {
      for (int c = 0; c < f.cols(); ++c) std::ranges::copy(f.field(comp, r, c), out.field(comp, c, r).begin());
    }
  }
  out.mark_skew(f.skew());
  return out;
}

std::vector<double> pointwise_norm(const Form& f) {
  std::vector<double> out(f.points(), 0.0);
  for (std::size_t s = 0; s < f.scalar_fields(); ++s) {
    auto v = f.field(s);
    for (std::size_t p = 0; p < out.size(); ++p) out[p] += v[p] * v[p];
  }
  for (double& v : out) v = std::sqrt(v);
  return out;
}

Form harmonic_part(const Form& f) {
  Form out(f.grid(), f.degree(), f.shape());
  for (std::size_t s = 0; s < f.scalar_fields(); ++s) {
    auto v = f.field(s);
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    std::ranges::fill(out.field(s), mean);
  }
  out.mark_skew(f.skew());
  return out;
}

double max_abs_mean(const Form& f) {
  double worst = 0.0;
  for (std::size_t s = 0; s < f.scalar_fields(); ++s) {
    auto v = f.field(s);
    worst = std::max(worst, std::abs(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size())));
  }
  return worst;
}

double max_abs_entry(const Form& f) {
  double worst = 0.0;
  for (double v : f.values()) worst = std::max(worst, std::abs(v));
  return worst;
}

}  // namespace gaugeflow
