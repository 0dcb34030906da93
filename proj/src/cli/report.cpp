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

#include "vru/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "vru/core/error.hpp"
#include "vru/eval/metrics.hpp"

namespace vru::cli
{

namespace fs = std::filesystem;

namespace
{

std::string g(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string & s, const fs::path & where)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception &) {
    throw DataError("bad number '" + s + "' in " + where.string());
  }
}

std::vector<std::string> split_line(const std::string & line)
{
  std::vector<std::string> f;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  f.push_back(cur);
  return f;
}

// Linear-interpolation quantile of sorted values.
double quantile(const std::vector<double> & sorted, double q)
{
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Minimal SVG writer.
class Svg
{
public:
  Svg(double w, double h) : w_(w), h_(h) {}
  void rect(double x, double y, double w, double h, const std::string & fill, const std::string & stroke = "none")
  {
    out_ << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << w << "\" height=\"" << h << "\" fill=\"" << fill
         << "\" stroke=\"" << stroke << "\"/>\n";
  }
  void line(double x0, double y0, double x1, double y1, const std::string & stroke, const std::string & dash = "")
  {
    out_ << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y1 << "\" stroke=\""
         << stroke << "\"";
    if (!dash.empty()) {
      out_ << " stroke-dasharray=\"" << dash << "\"";
    }
    out_ << "/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>> & pts, const std::string & stroke)
  {
    out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" points=\"";
    for (const auto & [x, y] : pts) out_ << x << ',' << y << ' ';
    out_ << "\"/>\n";
  }
  void polygon(const std::vector<std::pair<double, double>> & pts, const std::string & fill)
  {
    out_ << "<polygon fill=\"" << fill << "\" fill-opacity=\"0.3\" stroke=\"none\" points=\"";
    for (const auto & [x, y] : pts) out_ << x << ',' << y << ' ';
    out_ << "\"/>\n";
  }
  void text(double x, double y, const std::string & s, int size = 11, const std::string & anchor = "start")
  {
    out_ << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size << "\" font-family=\"sans-serif\""
         << " text-anchor=\"" << anchor << "\">" << s << "</text>\n";
  }
  void save(const fs::path & path) const
  {
    std::ofstream f(path);
    if (!f) {
      throw IoError("cannot write " + path.string());
    }
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_ << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << out_.str() << "</svg>\n";
  }

private:
  double w_;
  double h_;
  std::ostringstream out_;
};

CsvTable make_curves(const fs::path & ensembles_csv)
{
  CsvTable t;
  t.header = {"id", "step", "mean", "lower", "upper"};
  for (const auto & e : read_ensembles_csv(ensembles_csv)) {
    const Eigen::RowVectorXd m = e.mean();
    const Eigen::RowVectorXd s = e.stddev();
    for (int k = 0; k < e.steps(); ++k) {
      if (!e.valid[static_cast<std::size_t>(k)]) {
        continue;
      }
      t.rows.push_back({e.id, std::to_string(k), g(m(k)), g(m(k) - s(k)), g(m(k) + s(k))});
    }
  }
  return t;
}

CsvTable make_gamma_box(const fs::path & gamma_csv)
{
  const CsvTable in = read_csv(gamma_csv);
  const auto c_gamma = in.column("gamma");
  const auto c_amb = in.column("ambiguous");
  const auto c_label = in.column("label");
  std::map<std::string, std::vector<double>> groups;
  const std::vector<std::string> order{"all", "clear", "ambiguous", "interaction", "non_interaction"};
  for (const auto & r : in.rows) {
    const double v = to_double(r[c_gamma], gamma_csv);
    groups["all"].push_back(v);
    groups[r[c_amb] == "1" ? "ambiguous" : "clear"].push_back(v);
    groups[r[c_label]].push_back(v);
  }
  CsvTable t;
  t.header = {"group", "n", "min", "q1", "median", "q3", "max", "mean"};
  for (const auto & name : order) {
    auto it = groups.find(name);
    if (it == groups.end() || it->second.empty()) {
      continue;
    }
    auto v = it->second;
    std::sort(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    t.rows.push_back({name, std::to_string(v.size()), g(v.front()), g(quantile(v, 0.25)), g(quantile(v, 0.5)),
                      g(quantile(v, 0.75)), g(v.back()), g(mean)});
  }
  return t;
}

CsvTable make_confusion(const fs::path & runs_csv)
{
  const CsvTable in = read_csv(runs_csv);
  long long tp = 0, tn = 0, fp = 0, fn = 0;
  for (const auto & r : in.rows) {
    tp += std::stoll(r[in.column("tp")]);
    tn += std::stoll(r[in.column("tn")]);
    fp += std::stoll(r[in.column("fp")]);
    fn += std::stoll(r[in.column("fn")]);
  }
  CsvTable t;
  t.header = {"truth", "prediction", "count"};
  t.rows = {{"interaction", "interaction", std::to_string(tp)},
            {"interaction", "non_interaction", std::to_string(fn)},
            {"non_interaction", "interaction", std::to_string(fp)},
            {"non_interaction", "non_interaction", std::to_string(tn)}};
  return t;
}

void draw_curves(const CsvTable & curves, const std::map<std::string, std::string> & labels, const fs::path & out)
{
  // First three sequences of each label, or fewer.
  std::vector<std::string> ids;
  std::map<std::string, int> per_label;
  std::string last;
  for (const auto & r : curves.rows) {
    if (r[0] == last) {
      continue;
    }
    last = r[0];
    const auto it = labels.find(r[0]);
    const std::string lab = it == labels.end() ? "" : it->second;
    if (per_label[lab] < 3) {
      ++per_label[lab];
      ids.push_back(r[0]);
    }
  }
  const double pw = 300, ph = 160, margin = 30;
  const int cols = 3;
  const int rows = std::max(1, static_cast<int>((ids.size() + cols - 1) / cols));
  Svg svg(cols * (pw + margin) + margin, rows * (ph + 2 * margin) + margin);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const double ox = margin + static_cast<double>(k % cols) * (pw + margin);
    const double oy = margin + static_cast<double>(k / cols) * (ph + 2 * margin);
    std::vector<double> step, mean, lo, hi;
    for (const auto & r : curves.rows) {
      if (r[0] == ids[k]) {
        step.push_back(std::stod(r[1]));
        mean.push_back(std::stod(r[2]));
        lo.push_back(std::stod(r[3]));
        hi.push_back(std::stod(r[4]));
      }
    }
    const double smax = std::max(1.0, step.back());
    auto px = [&](double s) { return ox + pw * s / smax; };
    auto py = [&](double p) { return oy + ph * (1.0 - std::clamp(p, 0.0, 1.0)); };
    svg.rect(ox, oy, pw, ph, "none", "#888");
    svg.line(ox, py(0.5), ox + pw, py(0.5), "#bbb", "4,3");
    std::vector<std::pair<double, double>> band, line;
    for (std::size_t i = 0; i < step.size(); ++i) band.emplace_back(px(step[i]), py(hi[i]));
    for (std::size_t i = step.size(); i-- > 0;) band.emplace_back(px(step[i]), py(lo[i]));
    for (std::size_t i = 0; i < step.size(); ++i) line.emplace_back(px(step[i]), py(mean[i]));
    svg.polygon(band, "#d62728");
    svg.polyline(line, "#d62728");
    const auto it = labels.find(ids[k]);
    svg.text(ox, oy - 6, ids[k] + (it == labels.end() ? "" : " (" + it->second + ")"));
    svg.text(ox - 4, py(1.0) + 4, "1", 9, "end");
    svg.text(ox - 4, py(0.0) + 4, "0", 9, "end");
    svg.text(ox + pw, oy + ph + 14, "step", 9, "end");
  }
  svg.save(out);
}

void draw_gamma_box(const CsvTable & box, const fs::path & out)
{
  const double w = 110, h = 240, margin = 40;
  Svg svg(margin * 2 + w * static_cast<double>(box.rows.size()), h + 2 * margin);
  auto py = [&](double v) { return margin + h * (1.0 - std::clamp(v, 0.0, 1.0)); };
  svg.line(margin, py(0), margin + w * static_cast<double>(box.rows.size()), py(0), "#888");
  svg.text(margin - 6, py(0) + 4, "0", 9, "end");
  svg.text(margin - 6, py(1) + 4, "1", 9, "end");
  for (std::size_t k = 0; k < box.rows.size(); ++k) {
    const auto & r = box.rows[k];
    const double cx = margin + w * (static_cast<double>(k) + 0.5);
    const double mn = std::stod(r[2]), q1 = std::stod(r[3]), md = std::stod(r[4]), q3 = std::stod(r[5]),
                 mx = std::stod(r[6]);
    svg.line(cx, py(mn), cx, py(q1), "black");
    svg.line(cx, py(q3), cx, py(mx), "black");
    svg.rect(cx - 25, py(q3), 50, std::max(0.5, py(q1) - py(q3)), "#9ecae1", "black");
    svg.line(cx - 25, py(md), cx + 25, py(md), "#d62728");
    svg.text(cx, margin + h + 16, r[0] + " (n=" + r[1] + ")", 10, "middle");
    svg.text(cx, margin + h + 30, "median " + r[4].substr(0, 6), 9, "middle");
  }
  svg.save(out);
}

void draw_confusion(const CsvTable & cm, const fs::path & out)
{
  const double cell = 110, margin = 110;
  Svg svg(margin + 2 * cell + 20, margin + 2 * cell + 20);
  long long total = 0, mx = 1;
  for (const auto & r : cm.rows) {
    total += std::stoll(r[2]);
    mx = std::max(mx, std::stoll(r[2]));
  }
  const std::vector<std::string> names{"interaction", "non_interaction"};
  for (const auto & r : cm.rows) {
    const double row = r[0] == names[0] ? 0 : 1;
    const double col = r[1] == names[0] ? 0 : 1;
    const double a = static_cast<double>(std::stoll(r[2])) / static_cast<double>(mx);
    char fill[16];
    std::snprintf(fill, sizeof fill, "#%02x%02x%02x", static_cast<int>(255 - 200 * a), static_cast<int>(255 - 120 * a),
                  255);
    svg.rect(margin + col * cell, margin + row * cell, cell, cell, fill, "#444");
    svg.text(margin + (col + 0.5) * cell, margin + (row + 0.5) * cell + 5, r[2], 16, "middle");
  }
  for (int i = 0; i < 2; ++i) {
    svg.text(margin - 8, margin + (i + 0.5) * cell + 4, names[static_cast<std::size_t>(i)], 10, "end");
    svg.text(margin + (i + 0.5) * cell, margin - 8, names[static_cast<std::size_t>(i)], 10, "middle");
  }
  svg.text(margin, 20, "rows: truth, columns: prediction, total " + std::to_string(total), 11);
  svg.save(out);
}

void draw_loss(const CsvTable & loss, const fs::path & out)
{
  const double w = 480, h = 260, margin = 50;
  Svg svg(w + 2 * margin, h + 2 * margin);
  const std::vector<std::pair<std::string, std::string>> series{
      {"recon", "#1f77b4"}, {"kl", "#2ca02c"}, {"total", "#d62728"}, {"val_total", "#ff7f0e"}};
  double ymax = 0.0;
  for (const auto & r : loss.rows) {
    for (const auto & [name, colour] : series) {
      const double v = std::stod(r[loss.column(name)]);
      if (std::isfinite(v)) ymax = std::max(ymax, v);
    }
  }
  ymax = ymax > 0 ? ymax : 1.0;
  const double emax = std::max(1.0, static_cast<double>(loss.rows.size()));
  svg.rect(margin, margin, w, h, "none", "#888");
  int k = 0;
  for (const auto & [name, colour] : series) {
    std::vector<std::pair<double, double>> pts;
    for (const auto & r : loss.rows) {
      const double v = std::stod(r[loss.column(name)]);
      if (!std::isfinite(v)) continue;
      const double e = std::stod(r[loss.column("epoch")]);
      pts.emplace_back(margin + w * e / emax, margin + h * (1.0 - v / ymax));
    }
    if (!pts.empty()) svg.polyline(pts, colour);
    svg.text(margin + w - 4, margin + 14 + 13 * k++, name, 10, "end");
  }
  svg.text(margin - 6, margin + 4, loss.rows.empty() ? "" : g(ymax).substr(0, 6), 9, "end");
  svg.text(margin + w, margin + h + 14, "epoch", 10, "end");
  svg.save(out);
}

bool is_eval_dir(const fs::path & d)
{
  return fs::exists(d / "metrics.csv") && fs::exists(d / "ensembles.csv") && fs::exists(d / "gamma.csv") &&
         fs::exists(d / "runs.csv");
}

}  // namespace

std::size_t CsvTable::column(const std::string & name) const
{
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw DataError("CSV has no column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const fs::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot read " + path.string());
  }
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(path.string() + " is empty");
  }
  t.header = split_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    auto f = split_line(line);
    if (f.size() != t.header.size()) {
      throw DataError(path.string() + ": row with " + std::to_string(f.size()) + " fields, expected " +
                      std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(f));
  }
  return t;
}

void write_csv(const fs::path & path, const CsvTable & table)
{
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  auto row = [&](const std::vector<std::string> & r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      out << (i ? "," : "") << r[i];
    }
    out << '\n';
  };
  row(table.header);
  for (const auto & r : table.rows) row(r);
}

std::vector<uncertainty::PredictionEnsemble> read_ensembles_csv(const fs::path & path)
{
  const CsvTable t = read_csv(path);
  if (t.header.size() < 4 || t.header[0] != "id" || t.header[1] != "step" || t.header[2] != "valid") {
    throw DataError(path.string() + " is not an ensembles file");
  }
  const int n = static_cast<int>(t.header.size()) - 3;
  std::vector<uncertainty::PredictionEnsemble> out;
  std::size_t i = 0;
  while (i < t.rows.size()) {
    std::size_t j = i;
    while (j < t.rows.size() && t.rows[j][0] == t.rows[i][0]) ++j;
    uncertainty::PredictionEnsemble e;
    e.id = t.rows[i][0];
    const auto steps = static_cast<Eigen::Index>(j - i);
    e.interaction.resize(n, steps);
    e.valid.resize(static_cast<std::size_t>(steps));
    for (std::size_t r = i; r < j; ++r) {
      const auto k = static_cast<Eigen::Index>(r - i);
      if (std::stoll(t.rows[r][1]) != k) {
        throw DataError(path.string() + ": steps of " + e.id + " are not consecutive");
      }
      e.valid[static_cast<std::size_t>(k)] = t.rows[r][2] == "1" ? 1 : 0;
      for (int s = 0; s < n; ++s) {
        e.interaction(s, k) = to_double(t.rows[r][static_cast<std::size_t>(3 + s)], path);
      }
    }
    out.push_back(std::move(e));
    i = j;
  }
  return out;
}

std::vector<fs::path> cmd_report(const fs::path & run_dir)
{
  if (!fs::is_directory(run_dir)) {
    throw IoError("no run directory at " + run_dir.string());
  }
  std::vector<std::pair<std::string, fs::path>> evals;
  if (is_eval_dir(run_dir)) {
    evals.emplace_back("run", run_dir);
  }
  std::vector<fs::path> subs;
  for (const auto & entry : fs::directory_iterator(run_dir)) {
    if (entry.is_directory() && entry.path().filename() != "report" && is_eval_dir(entry.path())) {
      subs.push_back(entry.path());
    }
  }
  std::sort(subs.begin(), subs.end());
  for (const auto & s : subs) {
    evals.emplace_back(s.filename().string(), s);
  }
  if (evals.empty()) {
    throw DataError("no evaluation artifacts (metrics.csv, runs.csv, gamma.csv, ensembles.csv) under " +
                    run_dir.string());
  }

  const fs::path report = run_dir / "report";
  fs::create_directories(report);
  std::ostringstream md;
  md << "# Report\n\n";
  if (!is_eval_dir(run_dir) && fs::exists(run_dir / "metrics.csv")) {
    const auto grid = eval::read_metrics_csv(run_dir / "metrics.csv");
    md << "## Grid\n\n```\n" << eval::format_table(grid) << "```\n\n";
  }
  std::vector<fs::path> written;
  for (const auto & [name, dir] : evals) {
    const fs::path out = report / name;
    fs::create_directories(out);
    const CsvTable curves = make_curves(dir / "ensembles.csv");
    const CsvTable box = make_gamma_box(dir / "gamma.csv");
    const CsvTable cm = make_confusion(dir / "runs.csv");
    write_csv(out / "curves.csv", curves);
    write_csv(out / "gamma_box.csv", box);
    write_csv(out / "confusion.csv", cm);

    // The figures read back the CSVs just written.
    const CsvTable gamma = read_csv(dir / "gamma.csv");
    std::map<std::string, std::string> labels;
    for (const auto & r : gamma.rows) labels[r[gamma.column("id")]] = r[gamma.column("label")];
    draw_curves(read_csv(out / "curves.csv"), labels, out / "curves.svg");
    draw_gamma_box(read_csv(out / "gamma_box.csv"), out / "gamma_box.svg");
    draw_confusion(read_csv(out / "confusion.csv"), out / "confusion.svg");
    if (fs::exists(dir / "loss.csv")) {
      draw_loss(read_csv(dir / "loss.csv"), out / "loss.svg");
    }

    const auto metrics = eval::read_metrics_csv(dir / "metrics.csv");
    md << "## " << name << "\n\n```\n" << eval::format_table(metrics) << "```\n\n";
    md << "Uncertainty by group (gamma_box.csv):\n\n| group | n | median | mean |\n|---|---|---|---|\n";
    for (const auto & r : box.rows) {
      md << "| " << r[0] << " | " << r[1] << " | " << r[4] << " | " << r[7] << " |\n";
    }
    md << "\nConfusion over all runs (confusion.csv): ";
    for (const auto & r : cm.rows) {
      md << r[0] << "/" << r[1] << " = " << r[2] << (&r == &cm.rows.back() ? "" : ", ");
    }
    md << "\n\nFigures: " << name << "/curves.svg, " << name << "/gamma_box.svg, " << name << "/confusion.svg"
       << (fs::exists(dir / "loss.csv") ? ", " + name + "/loss.svg" : "") << "\n\n";
    written.push_back(out);
  }
  std::ofstream f(report / "report.md");
  if (!f) {
    throw IoError("cannot write " + (report / "report.md").string());
  }
  f << md.str();
  return written;
}

}  // namespace vru::cli
