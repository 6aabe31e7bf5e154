#include <doctest.h>

#include <omp.h>

#include "sinkflow/kernels.hpp"
#include "sinkflow/rng.hpp"
#include "support.hpp"

using namespace sinkflow;
namespace ks = sinkflow::kernels::serial;
namespace kp = sinkflow::kernels::parallel;

// Sizes straddle the parallel threshold so both branches of every kernel run.
TEST_CASE("parallel kernels match the serial reference bitwise") {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(4);
  CounterRng rng(99);
  for (auto [n, m] : {std::pair<std::size_t, std::size_t>{3, 5}, {200, 150}, {40, 700}}) {
    Matrix a = testing::random_table(rng, n, m);
    Matrix pos(n, m);
    for (double& v : pos.data()) v = rng.uniform(0.01, 1.0);
    std::vector<double> rs(n), rp(n), cs(m), cp(m);
    ks::row_sums(a, rs);
    kp::row_sums(a, rp);
    CHECK(rs == rp);
    ks::col_sums(a, cs);
    kp::col_sums(a, cp);
    CHECK(cs == cp);

    const auto fr = testing::random_vector(rng, n);
    const auto fc = testing::random_vector(rng, m);
    Matrix s1 = a, s2 = a;
    ks::scale_rows(s1, fr);
    kp::scale_rows(s2, fr);
    CHECK(s1 == s2);
    ks::scale_cols(s1, fc);
    kp::scale_cols(s2, fc);
    CHECK(s1 == s2);

    std::vector<double> mu(n, 1.0 / static_cast<double>(n));
    Matrix o1(n, m), o2(n, m);
    ks::mirror_rows(pos, fc, mu, o1);
    kp::mirror_rows(pos, fc, mu, o2);
    CHECK(o1 == o2);

    ks::logsumexp_rows(a, fc, rs);
    kp::logsumexp_rows(a, fc, rp);
    CHECK(rs == rp);
    ks::logsumexp_cols(a, fr, cs);
    kp::logsumexp_cols(a, fr, cp);
    CHECK(cs == cp);

    ks::weighted_row_sums(pos, a, rs);
    kp::weighted_row_sums(pos, a, rp);
    CHECK(rs == rp);

    Matrix b = testing::random_table(rng, m, 7);
    Matrix p1(n, 7), p2(n, 7);
    ks::matmul(a, b, p1);
    kp::matmul(a, b, p2);
    CHECK(p1 == p2);
  }
  omp_set_num_threads(saved);
}

TEST_CASE("serial kernels against hand values") {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}});
  std::vector<double> r(2), c(2);
  ks::row_sums(a, r);
  ks::col_sums(a, c);
  CHECK(r == std::vector<double>{3, 7});
  CHECK(c == std::vector<double>{4, 6});
  const Matrix b = Matrix::from_rows({{0, 1}, {1, 0}});
  Matrix out(2, 2);
  ks::matmul(a, b, out);
  CHECK(out == Matrix::from_rows({{2, 1}, {4, 3}}));
  const Matrix z(1, 2, 0.0);
  std::vector<double> shift{0.0, 0.0}, l(1);
  ks::logsumexp_rows(z, shift, l);
  CHECK(l[0] == doctest::Approx(std::log(2.0)));
}

TEST_CASE("counter RNG streams") {
  CounterRng a(42), b(42);
  for (int k = 0; k < 100; ++k) CHECK(a.next_u64() == b.next_u64());
  CounterRng c(42);
  CHECK(c.at(5) == CounterRng(42).at(5));
  CHECK(CounterRng(0).at(0) == CounterRng::mix(0x9E3779B97F4A7C15ULL));
  double lo = 1.0, hi = 0.0, mean = 0.0;
  CounterRng u(1);
  for (int k = 0; k < 100000; ++k) {
    const double x = u.uniform();
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    mean += x;
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
  CounterRng g(2);
  double s = 0.0, s2 = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const double x = g.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / 100000) < 0.02);
  CHECK(s2 / 100000 == doctest::Approx(1.0).epsilon(0.02));
}
