#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nlwave/nullform.hpp"

using namespace nlwave;
using Tensor = NullFormTensor<double>;
using Quasi = QuasiNullForm<double>;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

namespace {

double uniform_pm1(std::mt19937_64& gen) {
  return 2.0 * ((gen() >> 11) * 0x1.0p-53) - 1.0;
}

Tensor random_tensor(std::mt19937_64& gen) {
  Tensor t;
  for (int i = 0; i < 81; ++i) t.coeffs(i) = uniform_pm1(gen);
  return t;
}

Mat3 random_symmetric(std::mt19937_64& gen) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) m(i, j) = m(j, i) = uniform_pm1(gen);
  return m;
}

Quasi random_quasi(std::mt19937_64& gen, bool null_m) {
  Quasi q;
  do {
    for (int i = 0; i < 3; ++i) q.a(i) = uniform_pm1(gen);
  } while (q.a.norm() < 1e-3);
  if (null_m) {
    q.m = uniform_pm1(gen) * minkowski_form<double>();
  } else {
    q.m = random_symmetric(gen);
  }
  return q;
}

// Null tensors built as sums of symmetrized lifts of null quasi forms.
Tensor random_null_tensor(std::mt19937_64& gen, int terms) {
  Tensor t;
  for (int k = 0; k < terms; ++k) {
    Tensor lift = lift_quasi(random_quasi(gen, /*null_m=*/true));
    t.coeffs += lift.coeffs;
  }
  return t;
}

// Independent quadruple-loop contraction, kept free of the library path.
double contract_oracle(const Tensor& t, const Mat3& h, const Mat3& k) {
  double acc = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n)
          acc += t(a, b, m, n) * h(a, b) * k(m, n);
  return acc;
}

// Dense-sampling null verdict: max symbol over 720 equispaced angles.
bool dense_null_oracle(const Tensor& t, double tol) {
  if (t.is_zero()) return true;
  double worst = 0.0;
  for (int j = 0; j < 720; ++j) {
    double s = null_symbol(t, ConeDirection<double>(2.0 * M_PI * j / 720.0));
    worst = std::max(worst, std::abs(s));
  }
  return worst <= tol * t.max_abs();
}

}  // namespace

TEST_CASE("symmetrize: zero and single-entry cases") {
  Tensor zero;
  Tensor sz = symmetrize(zero);
  CHECK(sz.is_zero());
  CHECK(sz.symmetric_flag);

  Tensor t;
  t(0, 1, 0, 0) = 2.0;
  Tensor s = symmetrize(t);
  CHECK(s(0, 1, 0, 0) == doctest::Approx(1.0));
  CHECK(s(1, 0, 0, 0) == doctest::Approx(1.0));
  double sum = s.coeffs.abs().sum();
  CHECK(sum == doctest::Approx(2.0));
  CHECK(s.symmetries_hold());
}

TEST_CASE("symmetrize: idempotent and contraction-invariant") {
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor t = random_tensor(gen);
    Tensor s = symmetrize(t);
    Tensor ss = symmetrize(s);
    CHECK((ss.coeffs - s.coeffs).abs().maxCoeff() < 1e-15);
    CHECK(s.symmetries_hold(1e-15));

    Mat3 h = random_symmetric(gen);
    Mat3 k = random_symmetric(gen);
    double before = contract_oracle(t, h, k);
    double after = contract(s, h, k);
    CHECK(std::abs(before - after) < 1e-12 * std::max(1.0, std::abs(before)));
  }
}

TEST_CASE("symmetrize preserves the null verdict") {
  std::mt19937_64 gen(55);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor t = random_null_tensor(gen, 1 + trial % 3);
    CHECK(is_null(t));
    CHECK(is_null(symmetrize(t)));
    Tensor gnr = random_tensor(gen);
    CHECK(is_null(gnr) == is_null(symmetrize(gnr)));
  }
}

TEST_CASE("contract: prototype single surviving term") {
  Tensor p = prototype_tensor<double>();
  Mat3 h = Mat3::Zero();
  h(0, 0) = 1.0;
  CHECK(contract(p, h, h) == doctest::Approx(1.0));
  CHECK(contract(p, Mat3::Zero(), h) == 0.0);
}

TEST_CASE("contract matches the quadruple-loop oracle") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor t = random_tensor(gen);
    Mat3 h = random_symmetric(gen);
    Mat3 k = random_symmetric(gen);
    double a = contract(t, h, k);
    double b = contract_oracle(t, h, k);
    CHECK(std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("null_symbol: prototype vanishes on the cone") {
  Tensor p = prototype_tensor<double>();
  for (int j = 0; j < 17; ++j) {
    double theta = 2.0 * M_PI * j / 17.0;
    CHECK(std::abs(null_symbol(p, ConeDirection<double>(theta))) < 1e-14);
  }
}

TEST_CASE("null_symbol: pure time entry gives X0^4 = 1") {
  Tensor t;
  t(0, 0, 0, 0) = 1.0;
  CHECK(null_symbol(t, ConeDirection<double>(0.3)) == doctest::Approx(1.0));
  CHECK(null_symbol(t, ConeDirection<double>(5.1)) == doctest::Approx(1.0));
}

TEST_CASE("null_symbol of a lift factors as (A.X)^2 m(X,X)") {
  std::mt19937_64 gen(29);
  for (int trial = 0; trial < 100; ++trial) {
    Quasi q = random_quasi(gen, false);
    Tensor lift = lift_quasi(q);
    double theta = 2.0 * M_PI * uniform_pm1(gen);
    ConeDirection<double> d(theta);
    Vec3 x = d.direction();
    double expected = std::pow(q.a.dot(x), 2) * x.dot(q.m * x);
    double got = null_symbol(lift, d);
    CHECK(std::abs(got - expected) < 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("null_symbol is even under X -> -X") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor t = random_tensor(gen);
    double theta = 2.0 * M_PI * ((gen() >> 11) * 0x1.0p-53);
    ConeDirection<double> d(theta);
    Vec3 x = -d.direction();
    double acc = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int m = 0; m < 3; ++m)
          for (int n = 0; n < 3; ++n) acc += t(a, b, m, n) * x(a) * x(b) * x(m) * x(n);
    CHECK(acc == doctest::Approx(null_symbol(t, d)).epsilon(1e-12));
  }
}

TEST_CASE("is_null: basic verdicts") {
  Tensor zero;
  CHECK(is_null(zero));
  CHECK(is_null(prototype_tensor<double>()));
  Tensor t;
  t(0, 0, 0, 0) = 1.0;
  CHECK_FALSE(is_null(t));
  CHECK_THROWS_AS(is_null(t, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(is_null(t, -1.0), std::invalid_argument);
}

TEST_CASE("is_null verdict is scale invariant") {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor t = (trial % 2 == 0) ? random_null_tensor(gen, 2) : random_tensor(gen);
    bool v = is_null(t);
    Tensor scaled = t;
    scaled.coeffs *= 1e8;
    CHECK(is_null(scaled) == v);
    scaled.coeffs = t.coeffs * 1e-8;
    CHECK(is_null(scaled) == v);
  }
}

TEST_CASE("is_null agrees with the dense-angle oracle") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor t = (trial % 2 == 0) ? random_null_tensor(gen, 1 + trial % 3) : random_tensor(gen);
    CHECK(is_null(t) == dense_null_oracle(t, kDefaultNullTol));
  }
}

TEST_CASE("is_null_quasi verdicts") {
  Quasi q;
  q.a = Vec3(1, 0, 0);
  q.m = minkowski_form<double>();
  CHECK(is_null_quasi(q));
  q.m = Mat3::Identity();  // symbol = 1 + cos^2 + sin^2 = 2 on the cone
  CHECK_FALSE(is_null_quasi(q));
  q.m = Mat3::Zero();
  CHECK(is_null_quasi(q));
}

TEST_CASE("lift_quasi: prototype reduction and degenerate direction") {
  Quasi q;
  q.a = Vec3(1, 0, 0);
  q.m = minkowski_form<double>();
  Tensor lift = lift_quasi(q);
  Tensor p = prototype_tensor<double>();
  CHECK((lift.coeffs - p.coeffs).abs().maxCoeff() == 0.0);

  std::mt19937_64 gen(5);
  Quasi degenerate;
  degenerate.m = random_symmetric(gen);
  degenerate.a = Vec3::Zero();
  CHECK(degenerate.degenerate());
  CHECK(lift_quasi(degenerate).is_zero());
}

TEST_CASE("lift equivalence: is_null(lift) == is_null_quasi for |A| > 0") {
  std::mt19937_64 gen(123);
  for (int trial = 0; trial < 300; ++trial) {
    Quasi q = random_quasi(gen, trial % 2 == 0);
    CHECK(is_null(lift_quasi(q)) == is_null_quasi(q));
  }
}

TEST_CASE("frame_decompose: outgoing and incoming profiles") {
  Eigen::Vector2d omega(std::cos(0.7), std::sin(0.7));
  Vec3 outgoing(-1.0, omega(0), omega(1));
  FrameSplit<double> s = frame_decompose<double>(outgoing, omega);
  CHECK(s.dminus == doctest::Approx(-1.0));
  CHECK(s.good.norm() < 1e-15);

  Vec3 incoming(1.0, omega(0), omega(1));
  s = frame_decompose<double>(incoming, omega);
  CHECK(s.dminus == doctest::Approx(0.0));
  CHECK((s.good - incoming).norm() < 1e-15);
}

TEST_CASE("frame_decompose reconstructs exactly and validates omega") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    double ang = M_PI * uniform_pm1(gen);
    Eigen::Vector2d omega(std::cos(ang), std::sin(ang));
    Vec3 grad(uniform_pm1(gen), uniform_pm1(gen), uniform_pm1(gen));
    FrameSplit<double> s = frame_decompose<double>(grad, omega);
    Vec3 y_minus(1.0, -omega(0), -omega(1));
    CHECK((y_minus * s.dminus + s.good - grad).cwiseAbs().maxCoeff() < 1e-15);
  }
  CHECK_THROWS_AS(frame_decompose<double>(Vec3(1, 2, 3), Eigen::Vector2d(0.5, 0.1)),
                  std::invalid_argument);
}
