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

#include "vru/eval/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "vru/core/error.hpp"

namespace vru::eval
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v)
{
  if (std::isnan(v)) {
    return "nan";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse(const std::string & s)
{
  if (s == "nan" || s.empty()) {
    return kNaN;
  }
  try {
    return std::stod(s);
  } catch (const std::exception &) {
    throw DataError("bad number '" + s + "' in metrics CSV");
  }
}

}  // namespace

Interaction vote(const Eigen::MatrixXd & scores, std::span<const std::uint8_t> valid)
{
  if (scores.cols() != 2 || static_cast<std::size_t>(scores.rows()) != valid.size()) {
    throw DimensionError("vote: expected T x 2 scores and T validity flags");
  }
  long long votes_int = 0;
  long long votes_non = 0;
  for (Eigen::Index t = 0; t < scores.rows(); ++t) {
    if (!valid[static_cast<std::size_t>(t)]) {
      continue;
    }
    if (scores(t, 1) >= scores(t, 0)) {
      ++votes_int;
    } else {
      ++votes_non;
    }
  }
  if (votes_int + votes_non == 0) {
    throw DataError("vote: no valid frames");
  }
  return votes_int >= votes_non ? Interaction::interaction : Interaction::non_interaction;
}

Interaction vote(const uncertainty::PredictionEnsemble & ens)
{
  const Eigen::RowVectorXd m = ens.mean();
  Eigen::MatrixXd scores(m.size(), 2);
  scores.col(0) = (1.0 - m.array()).matrix().transpose();
  scores.col(1) = m.transpose();
  return vote(scores, ens.valid);
}

ConfusionMatrix confusion(std::span<const Interaction> predictions, std::span<const Interaction> truths)
{
  if (predictions.size() != truths.size()) {
    throw DataError("confusion: " + std::to_string(predictions.size()) + " predictions for " +
                    std::to_string(truths.size()) + " labels");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool p = predictions[i] == Interaction::interaction;
    const bool t = truths[i] == Interaction::interaction;
    if (p && t) ++cm.tp;
    else if (!p && !t) ++cm.tn;
    else if (p) ++cm.fp;
    else ++cm.fn;
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix & cm)
{
  if (cm.tp < 0 || cm.tn < 0 || cm.fp < 0 || cm.fn < 0) {
    throw DataError("confusion counts must be nonnegative");
  }
  if (cm.total() == 0) {
    throw DataError("metrics of an empty confusion matrix");
  }
  MetricsReport r;
  const auto d = [](long long v) { return static_cast<double>(v); };
  r.accuracy = d(cm.tp + cm.tn) / d(cm.total());
  r.precision = cm.tp + cm.fp > 0 ? d(cm.tp) / d(cm.tp + cm.fp) : kNaN;
  r.recall = cm.tp + cm.fn > 0 ? d(cm.tp) / d(cm.tp + cm.fn) : kNaN;
  if (std::isnan(r.precision) || std::isnan(r.recall) || r.precision + r.recall == 0.0) {
    r.f1 = 0.0;
  } else {
    // Same value as 2PR / (P + R), but a single correctly rounded division.
    r.f1 = d(2 * cm.tp) / d(2 * cm.tp + cm.fp + cm.fn);
  }
  return r;
}

MetricsSummary summarize(std::span<const MetricsReport> runs)
{
  if (runs.empty()) {
    throw DataError("summarize: no runs");
  }
  MetricsSummary s;
  s.runs = static_cast<int>(runs.size());
  auto field = [&](double MetricsReport::*f, double * mean, double * sd) {
    double sum = 0.0;
    for (const auto & r : runs) sum += r.*f;
    *mean = sum / static_cast<double>(runs.size());
    if (runs.size() > 1) {
      double ss = 0.0;
      for (const auto & r : runs) ss += (r.*f - *mean) * (r.*f - *mean);
      *sd = std::sqrt(ss / static_cast<double>(runs.size() - 1));
    }
  };
  MetricsReport sd;
  field(&MetricsReport::accuracy, &s.mean.accuracy, &sd.accuracy);
  field(&MetricsReport::precision, &s.mean.precision, &sd.precision);
  field(&MetricsReport::recall, &s.mean.recall, &sd.recall);
  field(&MetricsReport::f1, &s.mean.f1, &sd.f1);
  if (runs.size() > 1) {
    s.stddev = sd;
  }
  return s;
}

std::string format_value(double mean, std::optional<double> stddev)
{
  if (std::isnan(mean)) {
    return "n/a";
  }
  char buf[64];
  if (stddev && !std::isnan(*stddev)) {
    std::snprintf(buf, sizeof buf, "%.3f ± %.3f", mean, *stddev);
  } else {
    std::snprintf(buf, sizeof buf, "%.3f", mean);
  }
  return buf;
}

void write_metrics_csv(const std::filesystem::path & path, std::span<const MetricsRow> rows)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "model,parsing,runs,accuracy,accuracy_std,precision,precision_std,recall,recall_std,f1,f1_std\n";
  for (const auto & r : rows) {
    const auto & m = r.summary.mean;
    const auto & s = r.summary.stddev;
    auto sd = [&](double MetricsReport::*f) { return s ? num((*s).*f) : std::string(); };
    out << r.model << ',' << r.parsing << ',' << r.summary.runs << ',' << num(m.accuracy) << ','
        << sd(&MetricsReport::accuracy) << ',' << num(m.precision) << ',' << sd(&MetricsReport::precision) << ','
        << num(m.recall) << ',' << sd(&MetricsReport::recall) << ',' << num(m.f1) << ',' << sd(&MetricsReport::f1)
        << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  std::string line;
  std::getline(in, line);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      f.push_back(cell);
    }
    if (line.back() == ',') {
      f.emplace_back();
    }
    if (f.size() != 11) {
      throw DataError("metrics CSV row has " + std::to_string(f.size()) + " fields: " + line);
    }
    MetricsRow r;
    r.model = f[0];
    r.parsing = f[1];
    r.summary.runs = std::stoi(f[2]);
    r.summary.mean = {parse(f[3]), parse(f[5]), parse(f[7]), parse(f[9])};
    if (!f[4].empty()) {
      r.summary.stddev = MetricsReport{parse(f[4]), parse(f[6]), parse(f[8]), parse(f[10])};
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string format_table(std::span<const MetricsRow> rows)
{
  // Pads by code points so the multi-byte "±" keeps columns aligned.
  auto cell = [](const std::string & s, std::size_t width) {
    std::size_t points = 0;
    for (unsigned char c : s) {
      points += (c & 0xC0) != 0x80 ? 1 : 0;
    }
    return s + std::string(width > points ? width - points : 0, ' ');
  };
  std::ostringstream out;
  out << cell("Model", 18) << ' ' << cell("Parsing", 8) << ' ' << cell("Accuracy", 16) << ' '
      << cell("Precision", 16) << ' ' << cell("Recall", 16) << ' ' << "F1\n";
  for (const auto & r : rows) {
    const auto & m = r.summary.mean;
    const auto & s = r.summary.stddev;
    auto sd = [&](double MetricsReport::*f) { return s ? std::optional<double>((*s).*f) : std::nullopt; };
    out << cell(r.model, 18) << ' ' << cell(r.parsing, 8) << ' '
        << cell(format_value(m.accuracy, sd(&MetricsReport::accuracy)), 16) << ' '
        << cell(format_value(m.precision, sd(&MetricsReport::precision)), 16) << ' '
        << cell(format_value(m.recall, sd(&MetricsReport::recall)), 16) << ' '
        << format_value(m.f1, sd(&MetricsReport::f1)) << '\n';
  }
  return out.str();
}

void write_runs_csv(const std::filesystem::path & path, std::span<const ConfusionMatrix> runs)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "run,tp,tn,fp,fn,accuracy,precision,recall,f1\n";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto m = metrics(runs[i]);
    out << i << ',' << runs[i].tp << ',' << runs[i].tn << ',' << runs[i].fp << ',' << runs[i].fn << ','
        << num(m.accuracy) << ',' << num(m.precision) << ',' << num(m.recall) << ',' << num(m.f1) << '\n';
  }
}

}  // namespace vru::eval
