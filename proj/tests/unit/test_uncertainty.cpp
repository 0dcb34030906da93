// Copyright 2026 The vrudetect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "vru/core/error.hpp"
#include "vru/core/rng.hpp"
#include "vru/uncertainty/kde.hpp"
#include "vru/uncertainty/stats.hpp"

using vru::Rng;
using vru::uniform;
using vru::uniform_int;
using vru::ConfigError;
using vru::DataError;
using vru::DimensionError;
using namespace vru::uncertainty;

namespace
{

PredictionEnsemble random_ensemble(Rng & rng, int n, int t, double spread)
{
  PredictionEnsemble e;
  e.id = "e";
  e.interaction.resize(n, t);
  e.valid.assign(static_cast<std::size_t>(t), 1);
  for (int j = 0; j < t; ++j) {
    const double c = uniform(rng, 0.2, 0.8);
    for (int s = 0; s < n; ++s) {
      e.interaction(s, j) = c + spread * uniform(rng, -1.0, 1.0);
    }
  }
  return e;
}

}  // namespace

TEST_CASE("kde examples")
{
  const std::vector<double> one{0.0};
  CHECK(kde_density(one, 0.1, 0.0) == doctest::Approx(3.98942280401).epsilon(1e-10));
  const std::vector<double> two{-1.0, 1.0};
  const double expect = std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi);
  CHECK(kde_density(two, 1.0, 0.0) == doctest::Approx(expect).epsilon(1e-14));
  CHECK_THROWS_AS(kde_density(one, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(kde_density(one, -1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(kde_density({}, 0.1, 0.0), DataError);
}

TEST_CASE("property: kde matches a brute-force Gaussian mixture")
{
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = uniform_int(rng, 1, 40);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto & v : s) v = uniform(rng, 0.0, 1.0);
    const double h = std::exp(uniform(rng, std::log(1e-3), std::log(1.0)));
    const double q = uniform(rng, -0.2, 1.2);
    long double sum = 0.0L;
    for (double v : s) {
      const long double u = (static_cast<long double>(q) - v) / h;
      sum += std::exp(-0.5L * u * u) / (std::sqrt(2.0L * std::numbers::pi_v<long double>) * h);
    }
    const double brute = static_cast<double>(sum / n);
    CHECK(std::abs(kde_density(s, h, q) - brute) <= 1e-9 * std::max(1.0, brute));
  }
}

TEST_CASE("property: kde integrates to one")
{
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(10);
    for (auto & v : s) v = uniform(rng, 0.0, 1.0);
    const double h = silverman_bandwidth(s);
    // Trapezoid rule over a range that covers all kernel mass.
    const double lo = -1.0 - 10 * h;
    const double hi = 2.0 + 10 * h;
    const int m = 20000;
    const double dx = (hi - lo) / m;
    double integral = 0.0;
    for (int i = 0; i <= m; ++i) {
      const double w = (i == 0 || i == m) ? 0.5 : 1.0;
      integral += w * kde_density(s, h, lo + i * dx);
    }
    CHECK(integral * dx == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("silverman bandwidth uses the sample deviation and the floor")
{
  const std::vector<double> s{0.0, 1.0};
  // sd = sqrt(0.5), n^-0.2 = 2^-0.2
  CHECK(silverman_bandwidth(s) == doctest::Approx(1.06 * std::sqrt(0.5) * std::pow(2.0, -0.2)).epsilon(1e-14));
  const std::vector<double> same{0.3, 0.3, 0.3};
  CHECK(silverman_bandwidth(same) == kBandwidthFloor);
  const std::vector<double> single{0.3};
  CHECK(silverman_bandwidth(single) == kBandwidthFloor);
}

TEST_CASE("coinciding samples score zero uncertainty")
{
  PredictionEnsemble e;
  e.id = "flat";
  e.interaction = Eigen::MatrixXd::Constant(50, 6, 0.7);
  e.valid = {1, 1, 1, 1, 1, 0};
  const auto ll = step_log_likelihoods(e);
  CHECK(std::isnan(ll(5)));
  CHECK(ll(0) == doctest::Approx(OmegaRule::max_log_likelihood()).epsilon(1e-12));
  OmegaRule omega{0.0, OmegaRule::max_log_likelihood()};
  CHECK(uncertainty(e, omega).gamma == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("step log-likelihoods reject ensembles without valid steps")
{
  PredictionEnsemble e;
  e.interaction = Eigen::MatrixXd::Constant(4, 3, 0.5);
  e.valid = {0, 0, 0};
  CHECK_THROWS_AS(step_log_likelihoods(e), DataError);
  e.valid = {1, 1};
  CHECK_THROWS_AS(step_log_likelihoods(e), DimensionError);
}

TEST_CASE("omega clamps onto the unit interval")
{
  OmegaRule r{-2.0, 4.0};
  CHECK(r(-2.0) == 0.0);
  CHECK(r(4.0) == 1.0);
  CHECK(r(1.0) == doctest::Approx(0.5));
  CHECK(r(-10.0) == 0.0);
  CHECK(r(10.0) == 1.0);
}

TEST_CASE("property: batch gamma lies in [0, 1] and the widest ensemble scores highest")
{
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<PredictionEnsemble> batch;
    for (int i = 0; i < 8; ++i) {
      batch.push_back(random_ensemble(rng, 30, uniform_int(rng, 1, 12), uniform(rng, 0.0, 0.2)));
    }
    const auto scores = uncertainty_batch(batch);
    for (const auto & s : scores) {
      CHECK(s.gamma >= 0.0);
      CHECK(s.gamma <= 1.0);
    }
  }
}

TEST_CASE("property: gamma is invariant to sample order")
{
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto e = random_ensemble(rng, 20, 7, 0.1);
    OmegaRule omega{-1.0, OmegaRule::max_log_likelihood()};
    const double g = uncertainty(e, omega).gamma;
    std::vector<int> perm(20);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    PredictionEnsemble p = e;
    for (int s = 0; s < 20; ++s) {
      p.interaction.row(s) = e.interaction.row(perm[static_cast<std::size_t>(s)]);
    }
    CHECK(uncertainty(p, omega).gamma == doctest::Approx(g).epsilon(1e-12));
  }
}

TEST_CASE("property: widening the spread never lowers gamma")
{
  Rng rng(8);
  OmegaRule omega{-1.0, OmegaRule::max_log_likelihood()};
  for (int trial = 0; trial < 1000; ++trial) {
    const auto e = random_ensemble(rng, 25, 5, uniform(rng, 0.0, 0.1));
    const double c = uniform(rng, 1.0, 3.0);
    PredictionEnsemble wide = e;
    const Eigen::RowVectorXd m = e.mean();
    wide.interaction = ((e.interaction.rowwise() - m) * c).rowwise() + m;
    CHECK(uncertainty(wide, omega).gamma >= uncertainty(e, omega).gamma - 1e-12);
  }
}

TEST_CASE("mann-whitney matches a reference computation")
{
  // Asymptotic two-sample test with tie correction and no continuity correction.
  const std::vector<double> a{0.8, 0.6, 0.7, 0.7, 0.9, 0.5, 0.65};
  const std::vector<double> b{0.4, 0.5, 0.3, 0.7, 0.2, 0.45};
  const auto r = mann_whitney(a, b);
  CHECK(r.u == doctest::Approx(37.5).epsilon(1e-14));
  CHECK(r.p_greater == doctest::Approx(0.008810178834401246).epsilon(1e-10));
  CHECK(r.p_two_sided == doctest::Approx(0.017620357668802492).epsilon(1e-10));
  const auto flipped = mann_whitney(b, a);
  CHECK(flipped.u == doctest::Approx(7 * 6 - 37.5));
  CHECK(flipped.p_greater == doctest::Approx(1.0 - r.p_greater).epsilon(1e-12));
  CHECK_THROWS_AS(mann_whitney({}, b), DataError);
}

TEST_CASE("property: mann-whitney U counts winning pairs")
{
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(static_cast<std::size_t>(uniform_int(rng, 1, 15)));
    std::vector<double> b(static_cast<std::size_t>(uniform_int(rng, 1, 15)));
    // Coarse grid so ties occur.
    for (auto & v : a) v = uniform_int(rng, 0, 6) / 6.0;
    for (auto & v : b) v = uniform_int(rng, 0, 6) / 6.0;
    double pairs = 0.0;
    for (double x : a) {
      for (double y : b) {
        pairs += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
      }
    }
    CHECK(mann_whitney(a, b).u == doctest::Approx(pairs));
  }
}
