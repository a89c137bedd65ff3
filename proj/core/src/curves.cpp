#include "love/harness/curves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace love {

int MetricsTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return int(i);
  throw std::invalid_argument("metrics: no column named " + name);
}

std::vector<double> MetricsTable::series(const std::string& name) const {
  const int c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[std::size_t(c)]);
  return out;
}

MetricsTable read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file: " + path);
  MetricsTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ls(line);
    std::string cell;
    if (!have_header) {
      while (std::getline(ls, cell, ',')) table.columns.push_back(cell);
      have_header = true;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    if (row.size() != table.columns.size())
      throw std::runtime_error("metrics row width mismatch in " + path);
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error("metrics file has no header: " + path);
  return table;
}

namespace {

std::vector<double> smooth(const std::vector<double>& xs, int window) {
  if (window <= 1) return xs;
  std::vector<double> out(xs.size());
  const int half = window / 2;
  for (int i = 0; i < int(xs.size()); ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(int(xs.size()) - 1, i + half);
    double acc = 0;
    for (int j = lo; j <= hi; ++j) acc += xs[std::size_t(j)];
    out[std::size_t(i)] = acc / double(hi - lo + 1);
  }
  return out;
}

}  // namespace

CurveSummary learning_curve(const std::vector<std::string>& metrics_files,
                            int smoothing_window, int final_window,
                            const std::string& column) {
  if (metrics_files.empty())
    throw std::invalid_argument("learning_curve: need at least one metrics file");

  std::vector<std::vector<double>> curves;
  std::size_t min_len = SIZE_MAX;
  for (const auto& path : metrics_files) {
    auto series = read_metrics_csv(path).series(column);
    min_len = std::min(min_len, series.size());
    curves.push_back(smooth(series, smoothing_window));
  }
  if (min_len == 0) throw std::runtime_error("learning_curve: empty metrics file");

  CurveSummary out;
  out.seeds = int(curves.size());
  out.window = final_window;
  const double n = double(curves.size());
  for (std::size_t e = 0; e < min_len; ++e) {
    double mean = 0;
    for (const auto& c : curves) mean += c[e];
    mean /= n;
    double var = 0;
    for (const auto& c : curves) var += (c[e] - mean) * (c[e] - mean);
    out.mean_curve.push_back(mean);
    out.std_curve.push_back(std::sqrt(var / n));
  }

  // Terminal window statistic per seed, then mean/std across seeds.
  const std::size_t w = std::min<std::size_t>(std::size_t(final_window), min_len);
  std::vector<double> finals;
  for (const auto& c : curves) {
    double acc = 0;
    for (std::size_t e = min_len - w; e < min_len; ++e) acc += c[e];
    finals.push_back(acc / double(w));
  }
  double fmean = 0;
  for (double f : finals) fmean += f;
  fmean /= n;
  double fvar = 0;
  for (double f : finals) fvar += (f - fmean) * (f - fmean);
  out.final_mean = fmean;
  out.final_std = std::sqrt(fvar / n);
  return out;
}

Image curve_image(const CurveSummary& summary, int width, int height) {
  Image img(width, height, 0.98f, 0.98f, 0.98f);
  if (summary.mean_curve.empty()) return img;
  double lo = summary.mean_curve[0], hi = summary.mean_curve[0];
  for (std::size_t i = 0; i < summary.mean_curve.size(); ++i) {
    lo = std::min(lo, summary.mean_curve[i] - summary.std_curve[i]);
    hi = std::max(hi, summary.mean_curve[i] + summary.std_curve[i]);
  }
  if (hi - lo < 1e-12) { hi = lo + 1; }
  const int margin = 10;
  auto X = [&](std::size_t i) {
    return margin + int(double(width - 2 * margin) * double(i) /
                        double(std::max<std::size_t>(summary.mean_curve.size() - 1, 1)));
  };
  auto Y = [&](double v) {
    return height - margin - int(double(height - 2 * margin) * (v - lo) / (hi - lo));
  };
  // Band: mean +- std.
  for (std::size_t i = 0; i < summary.mean_curve.size(); ++i) {
    const int x = X(i);
    const int y0 = Y(summary.mean_curve[i] + summary.std_curve[i]);
    const int y1 = Y(summary.mean_curve[i] - summary.std_curve[i]);
    img.line(x, y0, x, y1, 0.80f, 0.85f, 1.0f);
  }
  for (std::size_t i = 1; i < summary.mean_curve.size(); ++i) {
    img.line(X(i - 1), Y(summary.mean_curve[i - 1]), X(i), Y(summary.mean_curve[i]),
             0.1f, 0.2f, 0.8f);
  }
  return img;
}

std::string curve_csv(const CurveSummary& summary) {
  std::string out = "episode,mean,std\n";
  char buf[80];
  for (std::size_t i = 0; i < summary.mean_curve.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g\n", i, summary.mean_curve[i],
                  summary.std_curve[i]);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "final,%.9g,%.9g\n", summary.final_mean,
                summary.final_std);
  out += buf;
  return out;
}

}  // namespace love
