#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nlwave/grid.hpp"
#include "nlwave/spectral.hpp"

using namespace nlwave;

namespace {

// Deterministic uniform in [-1, 1); avoids the unspecified std distributions.
double uniform_pm1(std::mt19937_64& gen) {
  return 2.0 * ((gen() >> 11) * 0x1.0p-53) - 1.0;
}

// Random field band-limited to |mode| <= kmax on each axis.
GridField<double> random_band_limited(const PeriodicGrid<double>& g, int kmax,
                                      std::mt19937_64& gen) {
  GridField<double> f(g);
  double L = g.half_width;
  for (int m1 = -kmax; m1 <= kmax; ++m1)
    for (int m2 = -kmax; m2 <= kmax; ++m2) {
      double c = uniform_pm1(gen);
      double s = uniform_pm1(gen);
      for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
          double phase = M_PI / L * (m1 * g.coord(i) + m2 * g.coord(j));
          f.values(i, j) += c * std::cos(phase) + s * std::sin(phase);
        }
    }
  return f;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(PeriodicGrid<double>(12, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicGrid<double>(48, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicGrid<double>(32, 0.0), std::invalid_argument);
  PeriodicGrid<double> g(32, 2.0);
  CHECK(g.spacing() == doctest::Approx(0.125));
  CHECK(g.coord(0) == doctest::Approx(-2.0));
  CHECK(g.coord(16) == doctest::Approx(0.0));
}

TEST_CASE("forward/inverse round trip") {
  PeriodicGrid<double> g(32, M_PI);
  Spectral<double> sp(g);
  std::mt19937_64 gen(7);
  GridField<double> f(g);
  for (int j = 0; j < g.n; ++j)
    for (int i = 0; i < g.n; ++i) f.values(i, j) = uniform_pm1(gen);
  Array2<double> back = sp.inv(sp.fwd(f.values));
  CHECK((back - f.values).abs().maxCoeff() < 1e-13);
}

TEST_CASE("single-mode derivative is exact") {
  double L = 3.0;
  PeriodicGrid<double> g(64, L);
  Spectral<double> sp(g);
  auto f = sample_field<double>(g, [&](double x1, double) { return std::sin(M_PI * x1 / L); });
  auto exact = sample_field<double>(g, [&](double x1, double) {
    return M_PI / L * std::cos(M_PI * x1 / L);
  });
  Array2<double> d = sp.derivative(f.values, 0);
  CHECK((d - exact.values).abs().maxCoeff() < 1e-12);
}

TEST_CASE("constant field has zero derivative") {
  PeriodicGrid<double> g(32, 1.0);
  auto f = sample_field<double>(g, [](double, double) { return 4.25; });
  auto d = spatial_derivatives(f, 1);
  CHECK(d[0].values.abs().maxCoeff() < 1e-13);
  CHECK(d[1].values.abs().maxCoeff() < 1e-13);
}

TEST_CASE("mixed derivatives commute") {
  PeriodicGrid<double> g(64, M_PI);
  Spectral<double> sp(g);
  std::mt19937_64 gen(11);
  GridField<double> f = random_band_limited(g, 6, gen);
  Array2<double> d12 = sp.derivative(sp.derivative(f.values, 0), 1);
  Array2<double> d21 = sp.derivative(sp.derivative(f.values, 1), 0);
  double scale = d12.abs().maxCoeff();
  CHECK((d12 - d21).abs().maxCoeff() < 1e-13 * std::max(1.0, scale));
  // and the single-multiplier path agrees with the nested one
  Array2<double> d12b = sp.second_derivative(f.values, 0, 1);
  CHECK((d12 - d12b).abs().maxCoeff() < 1e-12 * std::max(1.0, scale));
}

TEST_CASE("poisson solve leaves zero-mean residual") {
  PeriodicGrid<double> g(64, M_PI);
  Spectral<double> sp(g);
  std::mt19937_64 gen(3);
  GridField<double> rhs = random_band_limited(g, 5, gen);
  double mean = 0.0;
  Array2<double> phi = sp.poisson(rhs.values, &mean);
  Array2<double> rhs0 = rhs.values - (rhs.values.sum() / (g.n * g.n));
  Array2<double> resid = -sp.laplacian(phi) - rhs0;
  CHECK(std::abs(mean - rhs.values.sum() / (g.n * g.n)) < 1e-13);
  CHECK(resid.abs().maxCoeff() < 1e-11 * rhs0.abs().maxCoeff());
  CHECK(std::abs(phi.sum()) < 1e-9);
}

TEST_CASE("poisson analytic mode: -lap phi = cos(2 x1)/2") {
  PeriodicGrid<double> g(64, M_PI);
  Spectral<double> sp(g);
  auto rhs = sample_field<double>(g, [](double x1, double) { return 0.5 * std::cos(2 * x1); });
  Array2<double> phi = sp.poisson(rhs.values);
  auto exact = sample_field<double>(g, [](double x1, double) { return std::cos(2 * x1) / 8.0; });
  CHECK((phi - exact.values).abs().maxCoeff() < 1e-13);
}

TEST_CASE("dealias removes exactly the upper third") {
  PeriodicGrid<double> g(32, M_PI);
  Spectral<double> sp(g);
  // mode 9 < 32/2: above the 2/3 cut (32/3 = 10 -> keep |m| <= 10)... mode 12 is cut
  auto keep = sample_field<double>(g, [](double x1, double) { return std::cos(9 * x1); });
  auto cut = sample_field<double>(g, [](double x1, double) { return std::cos(12 * x1); });
  Array2<double> fk = sp.dealias(keep.values);
  Array2<double> fc = sp.dealias(cut.values);
  CHECK((fk - keep.values).abs().maxCoeff() < 1e-12);
  CHECK(fc.abs().maxCoeff() < 1e-12);
}

TEST_CASE("multiplier guard throws on interior zero") {
  PeriodicGrid<double> g(32, M_PI);
  Spectral<double> sp(g);
  GridField<double> rhs = sample_field<double>(g, [](double x1, double x2) {
    return std::cos(x1) + std::cos(x2);
  });
  Array2<double> mult = sp.multiplier_table([](double k1, double k2) {
    double v = k1 * k1 - k2 * k2;  // vanishes on the diagonal modes
    return v;
  });
  CHECK_THROWS_AS(sp.invert_multiplier(rhs.values, mult), std::invalid_argument);
}

TEST_CASE("quadrature of cos^2 over the box") {
  PeriodicGrid<double> g(32, M_PI);
  auto f = sample_field<double>(g, [](double x1, double) {
    double c = std::cos(x1);
    return c * c;
  });
  CHECK(integrate(f) == doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-12));
}

TEST_CASE("templated core instantiates for float") {
  PeriodicGrid<float> g(32, float(M_PI));
  Spectral<float> sp(g);
  auto f = sample_field<float>(g, [](float x1, float) { return std::sin(x1); });
  Array2<float> d = sp.derivative(f.values, 0);
  auto exact = sample_field<float>(g, [](float x1, float) { return std::cos(x1); });
  CHECK((d - exact.values).abs().maxCoeff() < 1e-5f);
}
