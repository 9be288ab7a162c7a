#include "gaugeflow/calculus.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "gaugeflow/error.hpp"
#include "gaugeflow/parallel.hpp"
#include "gaugeflow/spectral.hpp"

namespace gaugeflow {

namespace {

// i k z without the NaN-aware library complex multiply.
inline Complex times_ik(double k, Complex z) { return {-k * z.imag(), k * z.real()}; }

// Half-complex spectra of every scalar field of a form, same ordering.
struct Spectra {
  std::shared_ptr<const FourierTransform> fft;
  std::vector<Complex> data;

  std::span<const Complex> field(std::size_t s) const { return {data.data() + s * fft->modes(), fft->modes()}; }
  std::span<Complex> field(std::size_t s) { return {data.data() + s * fft->modes(), fft->modes()}; }
};

Spectra to_spectral(const Form& form) {
  Spectra out{FourierTransform::for_grid(form.grid()), {}};
  out.data.resize(form.scalar_fields() * out.fft->modes());
  parallel_for(form.scalar_fields(), [&](std::size_t s) { out.fft->forward(form.field(s), out.field(s)); });
  return out;
}

IndexMask full_mask(int n) { return (1u << n) - 1; }

}  // namespace

Form exterior_derivative(const Form& form) {
  const int n = form.grid().dim();
  const int k = form.degree();
  if (k >= n) throw Error("exterior_derivative: top-degree form");
  Form out(form.grid(), k + 1, form.shape());
  const Spectra spec = to_spectral(form);
  const auto& out_basis = form_basis(n, k + 1);
  const int entries = form.shape().entries();
  parallel_for(out_basis.size() * entries, [&](std::size_t task) {
    const int comp = static_cast<int>(task / entries);
    const int entry = static_cast<int>(task % entries);
    const IndexMask target = out_basis[comp];
    std::vector<Complex> acc(spec.fft->modes(), Complex{});
    for (int j : mask_axes(target)) {
      const IndexMask source = target & ~(1u << j);
      const double sign = wedge_sign(1u << j, source);
      auto src = spec.field(static_cast<std::size_t>(component_index(n, source)) * entries + entry);
      auto kj = spec.fft->wavenumber(j);
      for (std::size_t mode = 0; mode < acc.size(); ++mode) acc[mode] += times_ik(sign * kj[mode], src[mode]);
    }
    spec.fft->inverse(acc, out.field(static_cast<std::size_t>(comp) * entries + entry));
  });
  return out;
}

Form hodge_star(const Form& form) {
  const int n = form.grid().dim();
  const int k = form.degree();
  Form out(form.grid(), n - k, form.shape());
  const auto& basis = form_basis(n, k);
  const int entries = form.shape().entries();
  for (int comp = 0; comp < form.components(); ++comp) {
    const IndexMask source = basis[comp];
    const IndexMask target = full_mask(n) & ~source;
    const double sign = wedge_sign(source, target);
    const int out_comp = component_index(n, target);
    for (int e = 0; e < entries; ++e) {
      auto src = form.field(static_cast<std::size_t>(comp) * entries + e);
      auto dst = out.field(static_cast<std::size_t>(out_comp) * entries + e);
      for (std::size_t p = 0; p < src.size(); ++p) dst[p] = sign * src[p];
    }
  }
  out.mark_skew(form.skew());
  return out;
}

int codifferential_sign(int n, int k) { return (n * (k + 1) + 1) % 2 == 0 ? 1 : -1; }

Form codifferential(const Form& form) {
  if (form.degree() == 0) throw Error("codifferential of 0-form");
  Form out = hodge_star(exterior_derivative(hodge_star(form)));
  out *= codifferential_sign(form.grid().dim(), form.degree());
  out.mark_skew(form.skew());
  return out;
}

Form wedge(const Form& alpha, const Form& beta) {
  if (alpha.grid() != beta.grid()) throw Error("wedge: grid mismatch");
  const int n = alpha.grid().dim();
  const int k = alpha.degree();
  const int l = beta.degree();
  if (k + l > n) throw Error("wedge: degree overflow");
  if (alpha.cols() != beta.rows()) throw Error("wedge: value size mismatch");
  const int rows = alpha.rows();
  const int inner = alpha.cols();
  const int cols = beta.cols();
  Form out(alpha.grid(), k + l, {rows, cols});

  struct Term {
    int a;
    int b;
    double sign;
  };
  const auto& basis_a = form_basis(n, k);
  const auto& basis_b = form_basis(n, l);
  std::vector<std::vector<Term>> terms(out.components());
  for (int a = 0; a < static_cast<int>(basis_a.size()); ++a) {
    for (int b = 0; b < static_cast<int>(basis_b.size()); ++b) {
      int sign = wedge_sign(basis_a[a], basis_b[b]);
      if (sign != 0) terms[component_index(n, basis_a[a] | basis_b[b])].push_back({a, b, double(sign)});
    }
  }

  const std::size_t points = out.points();
  parallel_for(static_cast<std::size_t>(out.components()) * rows * cols, [&](std::size_t task) {
    const int comp = static_cast<int>(task / (rows * cols));
    const int r = static_cast<int>(task / cols % rows);
    const int c = static_cast<int>(task % cols);
    auto dst = out.field(comp, r, c);
    for (const Term& t : terms[comp]) {
      for (int s = 0; s < inner; ++s) {
        auto x = alpha.field(t.a, r, s);
        auto y = beta.field(t.b, s, c);
        for (std::size_t p = 0; p < points; ++p) dst[p] += t.sign * x[p] * y[p];
      }
    }
  });
  return out;
}

Form matrix_act_vector(const Form& matrix_form, const Form& vector_form) {
  if (vector_form.cols() != 1) throw Error("matrix_act_vector: second argument must be vector valued");
  if (matrix_form.cols() != vector_form.rows()) throw Error("matrix_act_vector: size mismatch");
  return wedge(matrix_form, vector_form);
}

Form laplacian(const Form& form) {
  Form out(form.grid(), form.degree(), form.shape());
  auto fft = FourierTransform::for_grid(form.grid());
  auto symbol = fft->laplacian_symbol();
  parallel_for(form.scalar_fields(), [&](std::size_t s) {
    std::vector<Complex> spec(fft->modes());
    fft->forward(form.field(s), spec);
    for (std::size_t mode = 0; mode < spec.size(); ++mode) spec[mode] *= -symbol[mode];
    fft->inverse(spec, out.field(s));
  });
  out.mark_skew(form.skew());
  return out;
}

Form solve_poisson(const Form& rho, bool zero_mean) {
  if (zero_mean) {
    // relative to the data so that large but exact right-hand sides pass
    const double mean = max_abs_mean(rho);
    const double scale = std::max(1.0, max_abs_entry(rho));
    if (mean > 1e-10 * scale) {
      throw Error("solve_poisson: right-hand side has nonzero mean " + sci(mean) + " at scale " + sci(scale) +
                  " (exactness identity broken upstream)");
    }
  }
  Form out(rho.grid(), rho.degree(), rho.shape());
  auto fft = FourierTransform::for_grid(rho.grid());
  auto symbol = fft->laplacian_symbol();
  parallel_for(rho.scalar_fields(), [&](std::size_t s) {
    std::vector<Complex> spec(fft->modes());
    fft->forward(rho.field(s), spec);
    for (std::size_t mode = 0; mode < spec.size(); ++mode) {
      spec[mode] = symbol[mode] > 0.0 ? spec[mode] / symbol[mode] : Complex{};
    }
    fft->inverse(spec, out.field(s));
  });
  out.mark_skew(rho.skew());
  return out;
}

Form solve_shifted_laplacian(const Form& rhs, double tau) {
  Form out(rhs.grid(), rhs.degree(), rhs.shape());
  auto fft = FourierTransform::for_grid(rhs.grid());
  auto symbol = fft->laplacian_symbol();
  parallel_for(rhs.scalar_fields(), [&](std::size_t s) {
    std::vector<Complex> spec(fft->modes());
    fft->forward(rhs.field(s), spec);
    for (std::size_t mode = 0; mode < spec.size(); ++mode) spec[mode] /= 1.0 + tau * symbol[mode];
    fft->inverse(spec, out.field(s));
  });
  return out;
}

Form project_closed(const Form& form) {
  const int n = form.grid().dim();
  const int k = form.degree();
  if (k == n) return form;  // every top-degree form is closed
  if (k == 0) return harmonic_part(form);
  Form out = form - codifferential(solve_poisson(exterior_derivative(form), false));
  out.mark_skew(form.skew());
  return out;
}

Form partial_derivative(const Form& form, int axis) {
  if (axis < 0 || axis >= form.grid().dim()) throw Error("partial_derivative: axis out of range");
  Form out(form.grid(), form.degree(), form.shape());
  auto fft = FourierTransform::for_grid(form.grid());
  auto k = fft->wavenumber(axis);
  parallel_for(form.scalar_fields(), [&](std::size_t s) {
    std::vector<Complex> spec(fft->modes());
    fft->forward(form.field(s), spec);
    for (std::size_t mode = 0; mode < spec.size(); ++mode) spec[mode] = times_ik(k[mode], spec[mode]);
    fft->inverse(spec, out.field(s));
  });
  out.mark_skew(form.skew());
  return out;
}

std::vector<double> gradient_magnitude(const Form& form) {
  const int n = form.grid().dim();
  auto fft = FourierTransform::for_grid(form.grid());
  const std::size_t points = form.points();
  std::vector<std::vector<double>> partial_sums(form.scalar_fields());
  parallel_for(form.scalar_fields(), [&](std::size_t s) {
    std::vector<Complex> spec(fft->modes());
    std::vector<Complex> work(fft->modes());
    std::vector<double> deriv(points);
    auto& acc = partial_sums[s];
    acc.assign(points, 0.0);
    fft->forward(form.field(s), spec);
    for (int a = 0; a < n; ++a) {
      auto k = fft->wavenumber(a);
      for (std::size_t mode = 0; mode < spec.size(); ++mode) work[mode] = times_ik(k[mode], spec[mode]);
      fft->inverse(work, deriv);
      for (std::size_t p = 0; p < points; ++p) acc[p] += deriv[p] * deriv[p];
    }
  });
  std::vector<double> out(points, 0.0);
  for (const auto& acc : partial_sums) {
    for (std::size_t p = 0; p < points; ++p) out[p] += acc[p];
  }
  for (double& v : out) v = std::sqrt(v);
  return out;
}

double l2_inner(const Form& alpha, const Form& beta) {
  if (!alpha.same_layout(beta)) throw Error("l2_inner: shape mismatch");
  auto a = alpha.values();
  auto b = beta.values();
  double sum = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  return sum * alpha.grid().cell_volume();
}

double l2_norm(const Form& form) { return std::sqrt(l2_inner(form, form)); }

}  // namespace gaugeflow
