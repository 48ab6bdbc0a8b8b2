#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csmlab/spectral.hpp"
#include "csmlab/time_integration.hpp"

using namespace csmlab;

namespace {

// O(n^4) forward DFT with the 1/n^2 convention; independent of FFTW.
std::vector<Complex> direct_dft(const std::vector<double>& f, int n) {
  std::vector<Complex> out(static_cast<std::size_t>(n) * n);
  for (int my = 0; my < n; ++my)
    for (int mx = 0; mx < n; ++mx) {
      const int kx = mx < n / 2 ? mx : mx - n;
      const int ky = my < n / 2 ? my : my - n;
      Complex sum = 0.0;
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
          sum += f[iy * n + ix] * std::polar(1.0, -kTwoPi * (kx * ix + ky * iy) / n);
      out[my * n + mx] = sum / double(n * n);
    }
  return out;
}

std::vector<double> random_samples(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> f(static_cast<std::size_t>(n) * n);
  for (auto& v : f) v = normal(rng);
  return f;
}

}  // namespace

TEST(WavenumberGrid, RejectsOddAndSmallGrids) {
  EXPECT_THROW(WavenumberGrid::make(7), InvalidInput);
  EXPECT_THROW(WavenumberGrid::make(6), InvalidInput);
  EXPECT_THROW(WavenumberGrid::make(16, -1.0), InvalidInput);
  EXPECT_NO_THROW(WavenumberGrid::make(8));
}

TEST(WavenumberGrid, IndexConventionAndMirror) {
  const auto g = WavenumberGrid::make(8);
  EXPECT_EQ(g->wavenumber_of(3), 3);
  EXPECT_EQ(g->wavenumber_of(4), -4);
  EXPECT_EQ(g->wavenumber_of(7), -1);
  const auto m = g->mode_index(2, -3);
  EXPECT_EQ(g->kx_int(m), 2);
  EXPECT_EQ(g->ky_int(m), -3);
  EXPECT_EQ(g->mirror(m), g->mode_index(-2, 3));
}

TEST(WavenumberGrid, DealiasMaskKeepsTwoThirds) {
  const auto g = WavenumberGrid::make(12);
  EXPECT_TRUE(g->dealias_mask()[g->mode_index(4, -4)]);
  EXPECT_FALSE(g->dealias_mask()[g->mode_index(5, 0)]);
  EXPECT_FALSE(g->dealias_mask()[g->mode_index(0, -6)]);
}

TEST(Transforms, ForwardMatchesDirectDft) {
  std::mt19937_64 rng(1);
  for (int n : {8, 10}) {
    const auto g = WavenumberGrid::make(n);
    const auto f = random_samples(n, rng);
    const auto expected = direct_dft(f, n);
    const SpectralField field = forward_transform(g, f);
    for (std::size_t m = 0; m < expected.size(); ++m) EXPECT_NEAR(std::abs(field.coeffs()[m] - expected[m]), 0.0, 1e-13);
  }
}

TEST(Transforms, RoundTripRecoversSamples) {
  std::mt19937_64 rng(2);
  const auto g = WavenumberGrid::make(16);
  const auto f = random_samples(16, rng);
  const auto back = inverse_transform(forward_transform(g, f));
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(back[i], f[i], 1e-13);
}

TEST(Transforms, InverseRejectsNonHermitian) {
  const auto g = WavenumberGrid::make(8);
  SpectralField field(g);
  field.coeff(1, 0) = Complex(1.0, 0.0);
  EXPECT_THROW(inverse_transform(field), InvalidInput);
}

TEST(Transforms, RejectsNonFiniteCoefficients) {
  const auto g = WavenumberGrid::make(8);
  std::vector<Complex> c(g->size());
  c[3] = Complex(std::nan(""), 0.0);
  EXPECT_THROW(SpectralField(g, c), InvalidInput);
}

TEST(Norms, MatchDirectSummationAndQuadrature) {
  const int n = 8;
  const auto g = WavenumberGrid::make(n);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_samples(n, rng);
    const auto coeffs = direct_dft(f, n);
    const SpectralField field = forward_transform(g, f);
    double quadrature = 0.0;
    for (double v : f) quadrature += v * v;
    quadrature *= g->spacing() * g->spacing();
    EXPECT_NEAR(l2_norm_sq(field), quadrature, 1e-12 * quadrature);
    for (double s : {0.0, 1.0, 2.0}) {
      double direct = 0.0;
      for (int my = 0; my < n; ++my)
        for (int mx = 0; mx < n; ++mx) {
          const int kx = mx < n / 2 ? mx : mx - n;
          const int ky = my < n / 2 ? my : my - n;
          direct += std::pow(1.0 + kx * kx + ky * ky, s) * std::norm(coeffs[my * n + mx]);
        }
      direct *= kTwoPi * kTwoPi;
      EXPECT_NEAR(hs_norm_sq(field, s), direct, 1e-12 * direct);
    }
  }
}

TEST(Norms, RejectNegativeOrder) {
  const auto g = WavenumberGrid::make(8);
  EXPECT_THROW(hs_norm_sq(SpectralField(g), -1.0), InvalidInput);
}

TEST(Norms, SingleModeClosedForm) {
  // f = cos(2x + y): ||f||^2 = 2 pi^2, ||f||^2_{H^1} = 6 * 2 pi^2.
  const auto g = WavenumberGrid::make(16);
  const auto f = sample(*g, [](double x, double y) { return std::cos(2 * x + y); });
  const SpectralField field = forward_transform(g, f);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(l2_norm_sq(field), 2 * pi2, 1e-12);
  EXPECT_NEAR(hs_norm_sq(field, 1.0), 12 * pi2, 1e-11);
}

TEST(Operators, GradientOfTrigPolynomial) {
  const auto g = WavenumberGrid::make(16);
  const SpectralField f = forward_transform(g, sample(*g, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); }));
  const Gradient grad = gradient(f);
  const auto dx = inverse_transform(grad.dx);
  const auto dy = inverse_transform(grad.dy);
  for (int iy = 0; iy < 16; ++iy)
    for (int ix = 0; ix < 16; ++ix) {
      const double x = g->x(ix), y = g->y(iy);
      EXPECT_NEAR(dx[iy * 16 + ix], 3 * std::cos(3 * x) * std::cos(2 * y), 1e-12);
      EXPECT_NEAR(dy[iy * 16 + ix], -2 * std::sin(3 * x) * std::sin(2 * y), 1e-12);
    }
}

TEST(Operators, LerayProjectionIsIdempotentAndSolenoidal) {
  const auto g = WavenumberGrid::make(16);
  std::mt19937_64 rng(4);
  const VelocityField raw = forward_transform(g, random_samples(16, rng), random_samples(16, rng));
  const VelocityField p = leray_project(raw);
  EXPECT_LT(divergence_residual(p), 1e-12);
  EXPECT_TRUE(is_solenoidal(p));
  const VelocityField pp = leray_project(p);
  EXPECT_LT((pp - p).max_amplitude(), 1e-15);
  // The removed part is a gradient, orthogonal to the projection.
  EXPECT_NEAR(inner_product(raw - p, p), 0.0, 1e-10);
}

TEST(Operators, LerayRemovesPureGradient) {
  const auto g = WavenumberGrid::make(16);
  const SpectralField phi = forward_transform(g, sample(*g, [](double x, double y) { return std::sin(x + 2 * y); }));
  const Gradient grad = gradient(phi);
  const VelocityField p = leray_project(VelocityField(grad.dx, grad.dy));
  EXPECT_LT(p.max_amplitude(), 1e-15);
}

TEST(Operators, DealiasZeroesUpperThird) {
  const auto g = WavenumberGrid::make(12);
  SpectralField f(g);
  f.coeff(5, 1) = 1.0;
  f.coeff(-5, -1) = 1.0;
  f.coeff(1, 1) = 1.0;
  f.coeff(-1, -1) = 1.0;
  const SpectralField d = dealias(f);
  EXPECT_EQ(d.coeff(5, 1), Complex(0.0));
  EXPECT_EQ(d.coeff(1, 1), Complex(1.0));
}

TEST(Operators, LaplacianEigenvalue) {
  const auto g = WavenumberGrid::make(16);
  const SpectralField f = forward_transform(g, sample(*g, [](double x, double y) { return std::cos(x - 3 * y); }));
  const SpectralField lap = laplacian(f);
  const SpectralField expected = -10.0 * f;
  EXPECT_LT((lap - expected).max_amplitude(), 1e-13);
}

TEST(Noise, BandLimitedNoiseProperties) {
  const auto g = WavenumberGrid::make(32);
  const VelocityField v = band_limited_noise(g, 9, 2.5, 4);
  EXPECT_NEAR(l2_norm_sq(v), 2.5, 1e-12);
  EXPECT_TRUE(is_solenoidal(v));
  EXPECT_TRUE(v.x.is_hermitian() && v.y.is_hermitian());
  EXPECT_EQ(v.x.coeff(0, 0), Complex(0.0));
  EXPECT_EQ(v.x.coeff(5, 0), Complex(0.0));
  const VelocityField again = band_limited_noise(g, 9, 2.5, 4);
  EXPECT_EQ((again - v).max_amplitude(), 0.0);
  EXPECT_EQ(l2_norm_sq(band_limited_noise(g, 9, 0.0, 4)), 0.0);
}
