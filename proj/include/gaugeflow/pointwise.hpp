#pragma once

#include <Eigen/Dense>

#include "gaugeflow/form.hpp"

namespace gaugeflow {

// Per-point access to the m x m values of one form component.

inline Eigen::MatrixXd value_at(const Form& f, int comp, std::size_t p) {
  Eigen::MatrixXd out(f.rows(), f.cols());
  for (int r = 0; r < f.rows(); ++r) {
    for (int c = 0; c < f.cols(); ++c) out(r, c) = f.at(comp, r, c, p);
  }
  return out;
}

inline void set_value(Form& f, int comp, std::size_t p, const Eigen::MatrixXd& v) {
  for (int r = 0; r < f.rows(); ++r) {
    for (int c = 0; c < f.cols(); ++c) f.at(comp, r, c, p) = v(r, c);
  }
}

}  // namespace gaugeflow
