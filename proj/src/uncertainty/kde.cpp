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

#include "vru/uncertainty/kde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "vru/core/error.hpp"

namespace vru::uncertainty
{

namespace
{

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double gamma_of(const Eigen::RowVectorXd & ll, const OmegaRule & omega)
{
  double sum = 0.0;
  int n = 0;
  for (Eigen::Index t = 0; t < ll.size(); ++t) {
    if (!std::isnan(ll(t))) {
      sum += omega(ll(t));
      ++n;
    }
  }
  return std::clamp(1.0 - sum / n, 0.0, 1.0);
}

}  // namespace

double kde_density(std::span<const double> samples, double h, double query)
{
  if (!(h > 0.0)) {
    throw ConfigError("KDE bandwidth must be positive");
  }
  if (samples.empty()) {
    throw DataError("KDE needs at least one sample");
  }
  double sum = 0.0;
  for (double s : samples) {
    const double u = (query - s) / h;
    sum += std::exp(-0.5 * u * u);
  }
  return sum * kInvSqrt2Pi / (static_cast<double>(samples.size()) * h);
}

double silverman_bandwidth(std::span<const double> samples, double floor)
{
  const auto n = samples.size();
  if (n < 2) {
    return floor;
  }
  double mean = 0.0;
  for (double s : samples) {
    mean += s;
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double s : samples) {
    ss += (s - mean) * (s - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return std::max(floor, 1.06 * sd * std::pow(static_cast<double>(n), -0.2));
}

Eigen::RowVectorXd step_log_likelihoods(const PredictionEnsemble & ens, double floor)
{
  const int steps = ens.steps();
  if (static_cast<int>(ens.valid.size()) != steps) {
    throw DimensionError("ensemble validity mask does not match its length");
  }
  if (ens.samples() < 1) {
    throw DataError("ensemble '" + ens.id + "' has no samples");
  }
  Eigen::RowVectorXd ll = Eigen::RowVectorXd::Constant(steps, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> col(static_cast<std::size_t>(ens.samples()));
  bool any = false;
  for (int t = 0; t < steps; ++t) {
    if (!ens.valid[static_cast<std::size_t>(t)]) {
      continue;
    }
    any = true;
    double mean = 0.0;
    for (int s = 0; s < ens.samples(); ++s) {
      col[static_cast<std::size_t>(s)] = ens.interaction(s, t);
      mean += ens.interaction(s, t);
    }
    mean /= ens.samples();
    const double h = silverman_bandwidth(col, floor);
    ll(t) = std::log(kde_density(col, h, mean));
  }
  if (!any) {
    throw DataError("ensemble '" + ens.id + "' has no valid steps");
  }
  return ll;
}

double OmegaRule::operator()(double loglik) const
{
  if (!(upper > lower)) {
    return 1.0;
  }
  return std::clamp((loglik - lower) / (upper - lower), 0.0, 1.0);
}

double OmegaRule::max_log_likelihood(double floor) { return -std::log(floor) + std::log(kInvSqrt2Pi); }

OmegaRule OmegaRule::from_batch(std::span<const Eigen::RowVectorXd> logliks, double floor)
{
  OmegaRule r;
  r.upper = max_log_likelihood(floor);
  r.lower = r.upper;
  for (const auto & ll : logliks) {
    for (Eigen::Index t = 0; t < ll.size(); ++t) {
      if (!std::isnan(ll(t))) {
        r.lower = std::min(r.lower, ll(t));
      }
    }
  }
  return r;
}

UncertaintyScore uncertainty(const PredictionEnsemble & ens, const OmegaRule & omega, double floor)
{
  UncertaintyScore s;
  s.per_step_loglik = step_log_likelihoods(ens, floor);
  s.gamma = gamma_of(s.per_step_loglik, omega);
  return s;
}

std::vector<UncertaintyScore> uncertainty_batch(std::span<const PredictionEnsemble> batch, double floor)
{
  std::vector<Eigen::RowVectorXd> lls;
  lls.reserve(batch.size());
  for (const auto & e : batch) {
    lls.push_back(step_log_likelihoods(e, floor));
  }
  const OmegaRule omega = OmegaRule::from_batch(lls, floor);
  std::vector<UncertaintyScore> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    UncertaintyScore s;
    s.per_step_loglik = std::move(lls[i]);
    s.gamma = gamma_of(s.per_step_loglik, omega);
    out.push_back(std::move(s));
  }
  return out;
}

void write_gamma_csv(const std::filesystem::path & path, std::span<const PredictionEnsemble> batch,
                     std::span<const UncertaintyScore> scores)
{
  if (batch.size() != scores.size()) {
    throw DimensionError("write_gamma_csv: ensembles and scores differ in count");
  }
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "id,gamma\n";
  char buf[64];
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", scores[i].gamma);
    out << batch[i].id << ',' << buf << '\n';
  }
}

}  // namespace vru::uncertainty
