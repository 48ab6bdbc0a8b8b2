#include "csmlab/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"

namespace csmlab {

// WavenumberGrid --------------------------------------------------------------

std::shared_ptr<const WavenumberGrid> WavenumberGrid::make(int n, double length) {
  if (n < 8 || n % 2 != 0) throw InvalidInput("n: grid size must be even and >= 8, got " + std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidInput("length: domain length must be positive");
  return std::shared_ptr<const WavenumberGrid>(new WavenumberGrid(n, length));
}

WavenumberGrid::WavenumberGrid(int n, double length) : n_(n), length_(length) {
  const std::size_t total = size();
  kx_.resize(total);
  ky_.resize(total);
  kx_deriv_.resize(total);
  ky_deriv_.resize(total);
  k_sq_.resize(total);
  mask_.resize(total);
  mirror_.resize(total);

  const double scale = kTwoPi / length;
  const int nyquist = -n / 2;
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const std::size_t m = static_cast<std::size_t>(iy) * n + ix;
      const int kx = wavenumber_of(ix);
      const int ky = wavenumber_of(iy);
      kx_[m] = scale * kx;
      ky_[m] = scale * ky;
      kx_deriv_[m] = kx == nyquist ? 0.0 : kx_[m];
      ky_deriv_[m] = ky == nyquist ? 0.0 : ky_[m];
      k_sq_[m] = kx_[m] * kx_[m] + ky_[m] * ky_[m];
      mask_[m] = (3 * std::abs(kx) <= n && 3 * std::abs(ky) <= n) ? 1 : 0;
      mirror_[m] = static_cast<std::size_t>((n - iy) % n) * n + static_cast<std::size_t>((n - ix) % n);
    }
  }
}

std::size_t WavenumberGrid::mode_index(int kx, int ky) const {
  const int half = n_ / 2;
  if (kx < -half || kx >= half || ky < -half || ky >= half)
    throw InvalidInput("wavenumber (" + std::to_string(kx) + "," + std::to_string(ky) + ") outside grid");
  const int ix = kx < 0 ? kx + n_ : kx;
  const int iy = ky < 0 ? ky + n_ : ky;
  return static_cast<std::size_t>(iy) * n_ + ix;
}

// SpectralField ---------------------------------------------------------------

SpectralField::SpectralField(GridPtr grid) : grid_(std::move(grid)), coeffs_(grid_->size()) {}

SpectralField::SpectralField(GridPtr grid, std::vector<Complex> coeffs)
    : grid_(std::move(grid)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != grid_->size())
    throw InvalidInput("coefficient count " + std::to_string(coeffs_.size()) + " does not match grid size " +
                       std::to_string(grid_->size()));
  if (!all_finite()) throw InvalidInput("spectral coefficients must be finite");
}

double SpectralField::max_amplitude() const {
  double m = 0.0;
  for (const auto& c : coeffs_) m = std::max(m, std::norm(c));
  return std::sqrt(m);
}

bool SpectralField::all_finite() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}

bool SpectralField::is_hermitian(double rel_tol) const {
  const double bound = rel_tol * max_amplitude();
  const double bound_sq = bound * bound;
  for (std::size_t m = 0; m < coeffs_.size(); ++m) {
    if (std::norm(coeffs_[grid_->mirror(m)] - std::conj(coeffs_[m])) > bound_sq) return false;
  }
  return true;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  for (std::size_t m = 0; m < coeffs_.size(); ++m) coeffs_[m] += other.coeffs_[m];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  for (std::size_t m = 0; m < coeffs_.size(); ++m) coeffs_[m] -= other.coeffs_[m];
  return *this;
}

SpectralField& SpectralField::operator*=(double scale) {
  for (auto& c : coeffs_) c *= scale;
  return *this;
}

SpectralField& SpectralField::add_scaled(const SpectralField& other, double scale) {
  for (std::size_t m = 0; m < coeffs_.size(); ++m) coeffs_[m] += scale * other.coeffs_[m];
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double scale, SpectralField a) { return a *= scale; }

// VelocityField ---------------------------------------------------------------

VelocityField::VelocityField(SpectralField x_component, SpectralField y_component)
    : x(std::move(x_component)), y(std::move(y_component)) {
  if (x.grid().n() != y.grid().n() || x.grid().length() != y.grid().length())
    throw InvalidInput("velocity components live on different grids");
}

VelocityField& VelocityField::operator+=(const VelocityField& other) {
  x += other.x;
  y += other.y;
  return *this;
}

VelocityField& VelocityField::operator-=(const VelocityField& other) {
  x -= other.x;
  y -= other.y;
  return *this;
}

VelocityField& VelocityField::operator*=(double scale) {
  x *= scale;
  y *= scale;
  return *this;
}

VelocityField& VelocityField::add_scaled(const VelocityField& other, double scale) {
  x.add_scaled(other.x, scale);
  y.add_scaled(other.y, scale);
  return *this;
}

double VelocityField::max_amplitude() const { return std::max(x.max_amplitude(), y.max_amplitude()); }

VelocityField operator+(VelocityField a, const VelocityField& b) { return a += b; }
VelocityField operator-(VelocityField a, const VelocityField& b) { return a -= b; }
VelocityField operator*(double scale, VelocityField a) { return a *= scale; }

// Transforms ------------------------------------------------------------------

SpectralField forward_transform(const GridPtr& grid, std::span<const double> samples) {
  const int n = grid->n();
  if (samples.size() != grid->size())
    throw InvalidInput("sample count " + std::to_string(samples.size()) + " does not match an n=" +
                       std::to_string(n) + " grid");
  if (!std::all_of(samples.begin(), samples.end(), [](double v) { return std::isfinite(v); }))
    throw InvalidInput("samples must be finite");

  const int half = n / 2 + 1;
  std::vector<Complex> packed(static_cast<std::size_t>(n) * half);
  detail::fft_r2c(n, samples, packed);

  std::vector<Complex> coeffs(grid->size());
  const double norm = 1.0 / (static_cast<double>(n) * n);
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < half; ++ix) {
      coeffs[static_cast<std::size_t>(iy) * n + ix] = packed[static_cast<std::size_t>(iy) * half + ix] * norm;
    }
  }
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = half; ix < n; ++ix) {
      const std::size_t m = static_cast<std::size_t>(iy) * n + ix;
      coeffs[m] = std::conj(coeffs[grid->mirror(m)]);
    }
  }
  return SpectralField(grid, std::move(coeffs));
}

std::vector<double> inverse_transform(const SpectralField& field) {
  if (!field.is_hermitian()) throw InvalidInput("inverse_transform: field is not Hermitian (not a real field)");
  const auto& grid = field.grid();
  const int n = grid.n();
  const int half = n / 2 + 1;
  std::vector<Complex> packed(static_cast<std::size_t>(n) * half);
  const auto coeffs = field.coeffs();
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < half; ++ix) {
      packed[static_cast<std::size_t>(iy) * half + ix] = coeffs[static_cast<std::size_t>(iy) * n + ix];
    }
  }
  std::vector<double> samples(grid.size());
  detail::fft_c2r(n, packed, samples);
  return samples;
}

VelocityField forward_transform(const GridPtr& grid, std::span<const double> x_samples,
                                std::span<const double> y_samples) {
  return {forward_transform(grid, x_samples), forward_transform(grid, y_samples)};
}

// Operators -------------------------------------------------------------------

SpectralField dealias(SpectralField field) {
  const auto mask = field.grid().dealias_mask();
  auto c = field.coeffs();
  for (std::size_t m = 0; m < c.size(); ++m)
    if (!mask[m]) c[m] = 0.0;
  return field;
}

VelocityField dealias(VelocityField v) {
  v.x = dealias(std::move(v.x));
  v.y = dealias(std::move(v.y));
  return v;
}

Gradient gradient(const SpectralField& field) {
  const auto& grid = field.grid();
  const auto kx = grid.kx_deriv();
  const auto ky = grid.ky_deriv();
  Gradient g{SpectralField(field.grid_ptr()), SpectralField(field.grid_ptr())};
  const auto f = field.coeffs();
  auto dx = g.dx.coeffs();
  auto dy = g.dy.coeffs();
  // i k f, written out to avoid the general complex multiply.
  for (std::size_t m = 0; m < f.size(); ++m) {
    dx[m] = Complex(-kx[m] * f[m].imag(), kx[m] * f[m].real());
    dy[m] = Complex(-ky[m] * f[m].imag(), ky[m] * f[m].real());
  }
  return g;
}

SpectralField divergence(const VelocityField& v) {
  const auto& grid = v.grid();
  const auto kx = grid.kx_deriv();
  const auto ky = grid.ky_deriv();
  SpectralField out(v.grid_ptr());
  auto d = out.coeffs();
  const auto u = v.x.coeffs();
  const auto w = v.y.coeffs();
  for (std::size_t m = 0; m < d.size(); ++m) {
    const Complex k_dot_v = kx[m] * u[m] + ky[m] * w[m];
    d[m] = Complex(-k_dot_v.imag(), k_dot_v.real());
  }
  return out;
}

SpectralField laplacian(const SpectralField& field) {
  SpectralField out = field;
  const auto k_sq = field.grid().k_sq();
  auto c = out.coeffs();
  for (std::size_t m = 0; m < c.size(); ++m) c[m] *= -k_sq[m];
  return out;
}

VelocityField laplacian(const VelocityField& v) { return {laplacian(v.x), laplacian(v.y)}; }

VelocityField leray_project(VelocityField v) {
  const auto& grid = v.grid();
  const auto kx = grid.kx_deriv();
  const auto ky = grid.ky_deriv();
  auto u = v.x.coeffs();
  auto w = v.y.coeffs();
  for (std::size_t m = 0; m < u.size(); ++m) {
    const double kk = kx[m] * kx[m] + ky[m] * ky[m];
    if (kk == 0.0) continue;
    const Complex k_dot_v = (kx[m] * u[m] + ky[m] * w[m]) / kk;
    u[m] -= kx[m] * k_dot_v;
    w[m] -= ky[m] * k_dot_v;
  }
  return v;
}

double divergence_residual(const VelocityField& v) {
  const auto& grid = v.grid();
  const auto kx = grid.kx_deriv();
  const auto ky = grid.ky_deriv();
  const auto u = v.x.coeffs();
  const auto w = v.y.coeffs();
  double r = 0.0;
  for (std::size_t m = 0; m < u.size(); ++m) r = std::max(r, std::norm(kx[m] * u[m] + ky[m] * w[m]));
  return std::sqrt(r);
}

bool is_solenoidal(const VelocityField& v) {
  return divergence_residual(v) <= kDivergenceTolerance * v.max_amplitude();
}

// Norms -----------------------------------------------------------------------

double l2_norm_sq(const SpectralField& field) {
  double sum = 0.0;
  for (const auto& c : field.coeffs()) sum += std::norm(c);
  const double length = field.grid().length();
  return length * length * sum;
}

double l2_norm_sq(const VelocityField& v) { return l2_norm_sq(v.x) + l2_norm_sq(v.y); }

double hs_norm_sq(const SpectralField& field, double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidInput("s: Sobolev order must be finite and >= 0");
  if (s == 0.0) return l2_norm_sq(field);
  const auto k_sq = field.grid().k_sq();
  const auto c = field.coeffs();
  double sum = 0.0;
  for (std::size_t m = 0; m < c.size(); ++m) sum += std::pow(1.0 + k_sq[m], s) * std::norm(c[m]);
  const double length = field.grid().length();
  return length * length * sum;
}

double hs_norm_sq_velocity(const VelocityField& v, double s) { return hs_norm_sq(v.x, s) + hs_norm_sq(v.y, s); }

double grad_hs_norm_sq(const VelocityField& v, double s) {
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidInput("s: Sobolev order must be finite and >= 0");
  const auto k_sq = v.grid().k_sq();
  const auto u = v.x.coeffs();
  const auto w = v.y.coeffs();
  double sum = 0.0;
  for (std::size_t m = 0; m < u.size(); ++m)
    sum += k_sq[m] * std::pow(1.0 + k_sq[m], s) * (std::norm(u[m]) + std::norm(w[m]));
  const double length = v.grid().length();
  return length * length * sum;
}

double inner_product(const VelocityField& a, const VelocityField& b) {
  double sum = 0.0;
  const auto ax = a.x.coeffs(), ay = a.y.coeffs(), bx = b.x.coeffs(), by = b.y.coeffs();
  for (std::size_t m = 0; m < ax.size(); ++m)
    sum += (std::conj(ax[m]) * bx[m]).real() + (std::conj(ay[m]) * by[m]).real();
  const double length = a.grid().length();
  return length * length * sum;
}

}  // namespace csmlab
