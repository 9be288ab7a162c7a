#pragma once

#include <vector>

#include "gaugeflow/form.hpp"

namespace gaugeflow {

// Exterior calculus of matrix- and vector-valued forms on the periodic unit
// torus with the Euclidean metric and the standard orientation. Derivatives
// are exact derivatives of the trigonometric interpolant.

/// d: k-forms to (k+1)-forms, (d w)_{a+j} = sum_j sgn(j, a) d_j w_a.
Form exterior_derivative(const Form& form);

/// Hodge star, *dx_a = sgn(a, a^c) dx_{a^c}; ** = (-1)^{k(n-k)}.
Form hodge_star(const Form& form);

/// d* = (-1)^{n(k+1)+1} * d *, the L2 adjoint of d. On 1-forms this is minus
/// the divergence.
Form codifferential(const Form& form);

/// Sign in front of *d* for the codifferential on k-forms in dimension n.
int codifferential_sign(int n, int k);

/// Wedge product with matrix multiplication of the values, order preserved:
/// (a ^ b)^i_j = sum_k a^i_k ^ b^k_j.
Form wedge(const Form& alpha, const Form& beta);

/// Matrix-valued form acting on a vector-valued form (wedge on the form
/// indices, matrix-vector product on the values).
Form matrix_act_vector(const Form& matrix_form, const Form& vector_form);

/// Componentwise spectral Laplacian.
Form laplacian(const Form& form);

/// Solves -Laplacian(phi) = rho componentwise and returns the zero-mean phi.
/// With zero_mean set, every coefficient of rho must have |mean| <= 1e-10.
Form solve_poisson(const Form& rho, bool zero_mean);

/// Solves (1 - tau Laplacian) v = rhs componentwise.
Form solve_shifted_laplacian(const Form& rhs, double tau);

/// Hodge projection onto closed forms, B - d* (-Laplacian)^{-1} d B.
Form project_closed(const Form& form);

/// Partial derivative of every coefficient along one axis.
Form partial_derivative(const Form& form, int axis);

/// Pointwise |grad w|: l2 over axes, components and value entries of the
/// partial derivatives of every coefficient.
std::vector<double> gradient_magnitude(const Form& form);

/// Discrete L2 inner product h^n sum_points sum_components Frobenius.
double l2_inner(const Form& alpha, const Form& beta);
double l2_norm(const Form& form);

}  // namespace gaugeflow
