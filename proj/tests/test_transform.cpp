#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlwave/transform.hpp"

using namespace nlwave;
using Vec3 = Eigen::Vector3d;

namespace {

GridField<double> gaussian(const PeriodicGrid<double>& g, double amp, double width) {
  return sample_field<double>(g, [&](double x1, double x2) {
    return amp * std::exp(-(x1 * x1 + x2 * x2) / (width * width));
  });
}

// d/dx1 of the gaussian, sampled analytically.
GridField<double> gaussian_dx1(const PeriodicGrid<double>& g, double amp, double width) {
  return sample_field<double>(g, [&](double x1, double x2) {
    return amp * (-2.0 * x1 / (width * width)) *
           std::exp(-(x1 * x1 + x2 * x2) / (width * width));
  });
}

QuasilinearIVP<double> make_ivp(const Vec3& a, const Eigen::Matrix3d& m,
                                GridField<double> v0, GridField<double> v1) {
  QuasilinearIVP<double> ivp;
  ivp.form.a = a;
  ivp.form.m = m;
  ivp.v0 = std::move(v0);
  ivp.v1 = std::move(v1);
  return ivp;
}

bool has_note(const std::vector<std::string>& notes, const std::string& needle) {
  for (const auto& n : notes)
    if (n.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("case a: fundamental theorem of calculus") {
  PeriodicGrid<double> g(128, 10.0);
  auto gfield = gaussian(g, 0.7, 1.3);
  auto ivp = make_ivp(Vec3(0, 1, 0), minkowski_form<double>(),
                      gaussian_dx1(g, 0.7, 1.3), GridField<double>(g));
  auto out = transform_case_a(ivp);
  CHECK((out.phi.values - gfield.values).abs().maxCoeff() < 1e-8);
  CHECK(out.psi.values.abs().maxCoeff() == 0.0);
  CHECK(out.tensor.symmetric_flag);
  CHECK_FALSE(has_note(out.notes, "total line integral"));
}

TEST_CASE("case a: zero data maps to zero data") {
  PeriodicGrid<double> g(32, 4.0);
  auto ivp = make_ivp(Vec3(0, 1, 1), minkowski_form<double>(), GridField<double>(g),
                      GridField<double>(g));
  auto out = transform_case_a(ivp);
  CHECK(out.phi.values.abs().maxCoeff() == 0.0);
  CHECK(out.psi.values.abs().maxCoeff() == 0.0);
}

TEST_CASE("case a: slanted line matches 4x refinement") {
  double amp = 0.5, width = 1.5, L = 12.0;
  auto run = [&](int n) {
    PeriodicGrid<double> g(n, L);
    auto ivp = make_ivp(Vec3(0, 1, 1), minkowski_form<double>(),
                        gaussian(g, amp, width), GridField<double>(g));
    return transform_case_a(ivp);
  };
  auto coarse = run(128);
  auto fine = run(512);
  double scale = fine.phi.values.abs().maxCoeff();
  double worst = 0.0;
  for (int i = 0; i < 128; ++i)
    for (int j = 0; j < 128; ++j)
      worst = std::max(worst,
                       std::abs(coarse.phi.values(i, j) - fine.phi.values(4 * i, 4 * j)));
  CHECK(worst < 1e-6 * scale);
}

TEST_CASE("case a: directional derivative identity A.grad(phi) = v0") {
  // data with zero line integrals: v0 = (A1 d1 + A2 d2) g, so phi = g
  PeriodicGrid<double> g(128, 12.0);
  double amp = 0.4, width = 1.5, a1 = 1.0, a2 = 0.5;
  auto v0 = sample_field<double>(g, [&](double x1, double x2) {
    double e = amp * std::exp(-(x1 * x1 + x2 * x2) / (width * width));
    return (a1 * (-2.0 * x1) + a2 * (-2.0 * x2)) / (width * width) * e;
  });
  auto ivp = make_ivp(Vec3(0, a1, a2), minkowski_form<double>(), v0, GridField<double>(g));
  auto out = transform_case_a(ivp);

  auto gfield = gaussian(g, amp, width);
  CHECK((out.phi.values - gfield.values).abs().maxCoeff() < 1e-9);
  CHECK_FALSE(has_note(out.notes, "total line integral"));

  Spectral<double> sp(g);
  Array2<double> lhs = a1 * sp.derivative(out.phi.values, 0) +
                       a2 * sp.derivative(out.phi.values, 1);
  double scale = ivp.v0.values.abs().maxCoeff();
  CHECK((lhs - ivp.v0.values).abs().maxCoeff() < 1e-7 * scale);
}

TEST_CASE("case a: wrong-case and unsupported-axis errors") {
  PeriodicGrid<double> g(32, 4.0);
  auto zero = GridField<double>(g);
  auto a0 = make_ivp(Vec3(1, 1, 0), minkowski_form<double>(), zero, zero);
  CHECK_THROWS_AS(transform_case_a(a0), TransformError);
  auto a1 = make_ivp(Vec3(0, 0, 1), minkowski_form<double>(), zero, zero);
  CHECK_THROWS_AS(transform_case_a(a1), TransformError);
}

TEST_CASE("case a: warnings for support and line-integral violations") {
  PeriodicGrid<double> g(64, 6.0);
  // plain gaussian: nonzero total line integral
  auto ivp = make_ivp(Vec3(0, 1, 0), minkowski_form<double>(), gaussian(g, 1.0, 1.0),
                      GridField<double>(g));
  auto out = transform_case_a(ivp);
  CHECK(has_note(out.notes, "total line integral"));

  // wide bump: support leaks outside the inner half box
  auto wide = make_ivp(Vec3(0, 1, 0), minkowski_form<double>(),
                       gaussian_dx1(g, 1.0, 4.0), GridField<double>(g));
  auto out2 = transform_case_a(wide);
  CHECK(has_note(out2.notes, "support"));
}

TEST_CASE("case b: zero data gives zero chi, phi, psi") {
  PeriodicGrid<double> g(32, 4.0);
  auto zero = GridField<double>(g);
  auto ivp = make_ivp(Vec3(1, 0, 0), minkowski_form<double>(), zero, zero);
  auto out = transform_case_b(ivp, zero);
  CHECK(out.phi.values.abs().maxCoeff() == 0.0);
  CHECK(out.psi.values.abs().maxCoeff() == 0.0);
  CHECK(out.rhs_mean_removed == 0.0);
}

TEST_CASE("case b: prototype chi equation matches the paper's block") {
  // For A = (1,0,0), m = diag(1,-1,-1), the chi equation reduces to
  // -lap chi = -vt0 + (vt0^2 - |grad v0|^2); with vt0 = v1 this is the
  // prototype block -lap chi = |v1|^2 - |grad v0|^2 - v1.
  PeriodicGrid<double> g(64, 8.0);
  auto v0 = gaussian(g, 0.3, 1.2);
  auto v1 = gaussian(g, 0.2, 1.5);
  auto ivp = make_ivp(Vec3(1, 0, 0), minkowski_form<double>(), v0, v1);
  auto out = transform_case_b(ivp, v1);

  Spectral<double> sp(g);
  Array2<double> d1 = sp.derivative(v0.values, 0);
  Array2<double> d2 = sp.derivative(v0.values, 1);
  Array2<double> rhs = v1.values.square() - d1.square() - d2.square() - v1.values;
  double mean = 0.0;
  Array2<double> chi = sp.poisson(rhs, &mean);
  CHECK((out.phi.values - chi).abs().maxCoeff() < 1e-12);
  CHECK(out.rhs_mean_removed == doctest::Approx(mean));
  // psi = v0 for the prototype direction
  CHECK((out.psi.values - v0.values).abs().maxCoeff() < 1e-13);
}

TEST_CASE("case b: cosine data has the analytic chi = cos(2 x1)/8") {
  PeriodicGrid<double> g(64, M_PI);
  auto v0 = sample_field<double>(g, [](double x1, double) { return std::cos(x1); });
  auto zero = GridField<double>(g);
  auto ivp = make_ivp(Vec3(1, 0, 0), minkowski_form<double>(), v0, zero);
  auto out = transform_case_b(ivp, zero);
  auto exact = sample_field<double>(g, [](double x1, double) { return std::cos(2 * x1) / 8.0; });
  CHECK((out.phi.values - exact.values).abs().maxCoeff() < 1e-12);
  CHECK(out.rhs_mean_removed == doctest::Approx(-0.5));  // mean of -sin^2
}

TEST_CASE("case b: elliptic residual and round trip at t = 0") {
  PeriodicGrid<double> g(64, 8.0);
  Vec3 a(1.0, 0.35, -0.2);
  auto v0 = gaussian(g, 0.3, 1.2);
  auto v1 = gaussian(g, -0.15, 1.6);
  auto ivp = make_ivp(a, minkowski_form<double>(), v0, v1);
  auto out = transform_case_b(ivp, v1);

  Spectral<double> sp(g);
  // forward operator applied to chi reproduces the zero-mean rhs
  Array2<double> d1v0 = sp.derivative(v0.values, 0);
  Array2<double> d2v0 = sp.derivative(v0.values, 1);
  const auto& m = ivp.form.m;
  Array2<double> quad = m(0, 0) * v1.values.square() + m(1, 1) * d1v0.square() +
                        m(2, 2) * d2v0.square();
  Array2<double> rhs = -a(0) * v1.values + a(1) * d1v0 + a(2) * d2v0 + a(0) * a(0) * quad;
  Array2<double> rhs0 = rhs - rhs.sum() / (g.n * g.n);
  Array2<double> chi11 = sp.second_derivative(out.phi.values, 0, 0);
  Array2<double> chi12 = sp.second_derivative(out.phi.values, 0, 1);
  Array2<double> chi22 = sp.second_derivative(out.phi.values, 1, 1);
  Array2<double> forward = a(1) * a(1) * chi11 + 2 * a(1) * a(2) * chi12 +
                           a(2) * a(2) * chi22 -
                           a(0) * a(0) * (chi11 + chi22);
  double scale = rhs0.abs().maxCoeff();
  CHECK((forward - rhs0).abs().maxCoeff() < 1e-10 * scale);

  // reconstruct_v(phi, psi, form) = v0 by construction
  auto v = reconstruct_v(out.phi, out.psi, ivp.form);
  CHECK((v.values - v0.values).abs().maxCoeff() <
        1e-10 * std::max(1.0, v0.values.abs().maxCoeff()));
}

TEST_CASE("case b: degenerate operator and wrong case are rejected") {
  PeriodicGrid<double> g(32, 4.0);
  auto zero = GridField<double>(g);
  auto bad = make_ivp(Vec3(1, 0.8, 0.7), minkowski_form<double>(), zero, zero);
  CHECK_THROWS_AS(transform_case_b(bad, zero), TransformError);
  auto wrong = make_ivp(Vec3(0, 1, 0), minkowski_form<double>(), zero, zero);
  CHECK_THROWS_AS(transform_case_b(wrong, zero), TransformError);
}

TEST_CASE("prototype: zero data and exact cosine mode") {
  PeriodicGrid<double> g(64, M_PI);
  auto zero = GridField<double>(g);
  auto out0 = transform_prototype(zero, zero);
  CHECK(out0.phi.values.abs().maxCoeff() == 0.0);
  CHECK(out0.psi.values.abs().maxCoeff() == 0.0);

  // v0 = 0, v1 = cos x1: phi = cos(2 x1)/8 - cos x1
  auto v1 = sample_field<double>(g, [](double x1, double) { return std::cos(x1); });
  auto out = transform_prototype(zero, v1);
  auto exact = sample_field<double>(g, [](double x1, double) {
    return std::cos(2 * x1) / 8.0 - std::cos(x1);
  });
  CHECK((out.phi.values - exact.values).abs().maxCoeff() < 1e-12);
  CHECK((out.psi.values - zero.values).abs().maxCoeff() == 0.0);
  CHECK(is_null(out.tensor));
}

TEST_CASE("prototype: poisson residual at spectral accuracy") {
  PeriodicGrid<double> g(64, 8.0);
  auto v0 = gaussian(g, 0.4, 1.4);
  auto v1 = gaussian(g, 0.25, 1.1);
  auto out = transform_prototype(v0, v1);
  Spectral<double> sp(g);
  Array2<double> d1 = sp.derivative(v0.values, 0);
  Array2<double> d2 = sp.derivative(v0.values, 1);
  Array2<double> rhs = v1.values.square() - d1.square() - d2.square() - v1.values;
  Array2<double> rhs0 = rhs - rhs.sum() / (g.n * g.n);
  Array2<double> resid = -sp.laplacian(out.phi.values) - rhs0;
  CHECK(resid.abs().maxCoeff() < 1e-10 * rhs0.abs().maxCoeff());
  // psi is v0, exactly
  CHECK((out.psi.values - v0.values).abs().maxCoeff() == 0.0);
}

TEST_CASE("reconstruct_v: reductions and spectral accuracy") {
  PeriodicGrid<double> g(64, M_PI);
  auto zero = GridField<double>(g);
  QuasiNullForm<double> form;
  form.a = Vec3(1, 0, 0);
  CHECK(reconstruct_v(zero, zero, form).values.abs().maxCoeff() == 0.0);

  auto ut = gaussian(g, 0.3, 0.8);
  auto v = reconstruct_v(zero, ut, form);
  CHECK((v.values - ut.values).abs().maxCoeff() == 0.0);

  form.a = Vec3(0, 1, 0);
  auto u = sample_field<double>(g, [](double x1, double) { return std::sin(x1); });
  auto exact = sample_field<double>(g, [](double x1, double) { return std::cos(x1); });
  auto vx = reconstruct_v(u, zero, form);
  CHECK((vx.values - exact.values).abs().maxCoeff() < 1e-12);
}
