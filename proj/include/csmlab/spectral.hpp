// Periodic-grid Fourier machinery on the 2D torus [0, L)^2.
//
// Storage convention: a field on an n x n grid is stored row-major with the
// y index outermost, `samples[iy * n + ix] = f(ix * L / n, iy * L / n)`.
// Spectral coefficients use the same layout over mode indices; index i maps
// to the integer wavenumber i for i < n/2 and i - n otherwise. Coefficients
// carry the 1/n^2 factor, so coeff(0,0) is the field mean and Parseval reads
// int |f|^2 = L^2 sum |f_k|^2.
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace csmlab {

using Complex = std::complex<double>;

/// Raised for precondition and validation failures. The message names the
/// offending quantity or configuration key.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kDivergenceTolerance = 1e-10;

class WavenumberGrid {
 public:
  /// n must be even and at least 8.
  static std::shared_ptr<const WavenumberGrid> make(int n, double length = kTwoPi);

  int n() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / n_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }

  /// Integer wavenumber of a one-dimensional index, in [-n/2, n/2).
  int wavenumber_of(int index) const { return index < n_ / 2 ? index : index - n_; }
  int kx_int(std::size_t mode) const { return wavenumber_of(static_cast<int>(mode % n_)); }
  int ky_int(std::size_t mode) const { return wavenumber_of(static_cast<int>(mode / n_)); }

  /// Storage index of the mode with integer wavenumbers (kx, ky); both must
  /// lie in [-n/2, n/2).
  std::size_t mode_index(int kx, int ky) const;
  /// Storage index of the mode -k.
  std::size_t mirror(std::size_t mode) const { return mirror_[mode]; }

  /// Physical wavenumbers 2*pi*k/L, including the Nyquist value -n/2.
  std::span<const double> kx() const { return kx_; }
  std::span<const double> ky() const { return ky_; }
  /// Wavenumbers used by derivative operators and the projection. The
  /// Nyquist row/column is zeroed so that derivatives of real fields stay real.
  std::span<const double> kx_deriv() const { return kx_deriv_; }
  std::span<const double> ky_deriv() const { return ky_deriv_; }
  /// |k|^2 with the full Nyquist magnitude.
  std::span<const double> k_sq() const { return k_sq_; }
  /// 2/3 rule: false exactly where |k_x| > n/3 or |k_y| > n/3.
  std::span<const std::uint8_t> dealias_mask() const { return mask_; }

  double x(int ix) const { return ix * spacing(); }
  double y(int iy) const { return iy * spacing(); }

 private:
  WavenumberGrid(int n, double length);

  int n_;
  double length_;
  std::vector<double> kx_, ky_, kx_deriv_, ky_deriv_, k_sq_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::size_t> mirror_;
};

using GridPtr = std::shared_ptr<const WavenumberGrid>;

/// Fourier coefficients of one real scalar field.
class SpectralField {
 public:
  explicit SpectralField(GridPtr grid);
  /// Takes ownership of `coeffs`; rejects a size mismatch or non-finite values.
  SpectralField(GridPtr grid, std::vector<Complex> coeffs);

  const WavenumberGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  std::span<const Complex> coeffs() const { return coeffs_; }
  std::span<Complex> coeffs() { return coeffs_; }
  Complex coeff(int kx, int ky) const { return coeffs_[grid_->mode_index(kx, ky)]; }
  Complex& coeff(int kx, int ky) { return coeffs_[grid_->mode_index(kx, ky)]; }

  double max_amplitude() const;
  bool all_finite() const;
  /// coeff(-k) == conj(coeff(k)) to `rel_tol` times the largest amplitude.
  bool is_hermitian(double rel_tol = kHermitianTolerance) const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double scale);
  /// this += scale * other
  SpectralField& add_scaled(const SpectralField& other, double scale);

 private:
  GridPtr grid_;
  std::vector<Complex> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double scale, SpectralField a);

struct VelocityField {
  SpectralField x;
  SpectralField y;

  explicit VelocityField(GridPtr grid) : x(grid), y(std::move(grid)) {}
  VelocityField(SpectralField x_component, SpectralField y_component);

  const WavenumberGrid& grid() const { return x.grid(); }
  const GridPtr& grid_ptr() const { return x.grid_ptr(); }

  VelocityField& operator+=(const VelocityField& other);
  VelocityField& operator-=(const VelocityField& other);
  VelocityField& operator*=(double scale);
  VelocityField& add_scaled(const VelocityField& other, double scale);
  bool all_finite() const { return x.all_finite() && y.all_finite(); }
  double max_amplitude() const;
};

VelocityField operator+(VelocityField a, const VelocityField& b);
VelocityField operator-(VelocityField a, const VelocityField& b);
VelocityField operator*(double scale, VelocityField a);

// Transforms -----------------------------------------------------------------

SpectralField forward_transform(const GridPtr& grid, std::span<const double> samples);
/// Rejects fields that are not Hermitian to kHermitianTolerance.
std::vector<double> inverse_transform(const SpectralField& field);

VelocityField forward_transform(const GridPtr& grid, std::span<const double> x_samples,
                                std::span<const double> y_samples);

/// Samples a callable f(x, y) at the grid points.
template <typename F>
std::vector<double> sample(const WavenumberGrid& grid, F&& f) {
  const int n = grid.n();
  std::vector<double> out(grid.size());
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) out[static_cast<std::size_t>(iy) * n + ix] = f(grid.x(ix), grid.y(iy));
  return out;
}

// Spectral operators ---------------------------------------------------------

SpectralField dealias(SpectralField field);
VelocityField dealias(VelocityField v);

struct Gradient {
  SpectralField dx;
  SpectralField dy;
};
Gradient gradient(const SpectralField& field);

SpectralField divergence(const VelocityField& v);
SpectralField laplacian(const SpectralField& field);
VelocityField laplacian(const VelocityField& v);

/// Per mode k != 0: v_k <- v_k - k (k . v_k) / |k|^2. The mean mode is kept.
VelocityField leray_project(VelocityField v);
/// max over modes of |k . v_k|.
double divergence_residual(const VelocityField& v);
/// True when divergence_residual <= kDivergenceTolerance * max mode amplitude.
bool is_solenoidal(const VelocityField& v);

// Norms ----------------------------------------------------------------------

double l2_norm_sq(const SpectralField& field);
double l2_norm_sq(const VelocityField& v);
/// Spectral H^s norm: L^2 sum (1 + |k|^2)^s |f_k|^2. Rejects negative s.
double hs_norm_sq(const SpectralField& field, double s);
/// Componentwise sum of hs_norm_sq.
double hs_norm_sq_velocity(const VelocityField& v, double s);
/// ||grad v||^2_{H^s} = L^2 sum_i sum_k |k|^2 (1 + |k|^2)^s |v_i,k|^2.
double grad_hs_norm_sq(const VelocityField& v, double s);
/// L^2 inner product, int a . b dx.
double inner_product(const VelocityField& a, const VelocityField& b);

}  // namespace csmlab
