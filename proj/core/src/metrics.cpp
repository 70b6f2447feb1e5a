#include "pdnet/metrics.hpp"

#include <cmath>
#include <fstream>

#include "pdnet/errors.hpp"

namespace pdnet {

ErrorReport relative_l2_error(const FieldSequence& pred, const FieldSequence& truth) {
  if (pred.fields.size() != truth.fields.size())
    throw ShapeError("relative_l2_error: sequence lengths differ (" +
                     std::to_string(pred.fields.size()) + " vs " +
                     std::to_string(truth.fields.size()) + ")");
  if (pred.fields.empty()) throw ShapeError("relative_l2_error: empty sequences");

  ErrorReport report;
  for (std::size_t k = 0; k < pred.fields.size(); ++k) {
    const Field& p = pred.fields[k];
    const Field& q = truth.fields[k];
    if (!(p.grid == q.grid) || p.channels != q.channels)
      throw ShapeError("relative_l2_error: field shapes differ at step " +
                       std::to_string(k));
    if (p.channels != 2)
      throw ShapeError("relative_l2_error: fields must have 2 channels, got " +
                       std::to_string(p.channels));
    if (std::abs(p.t - q.t) > 1e-9)
      throw ShapeError("relative_l2_error: timestamps differ at step " +
                       std::to_string(k) + " (" + std::to_string(p.t) + " vs " +
                       std::to_string(q.t) + ")");

    double diff_sq[2] = {0.0, 0.0};
    double truth_sq[2] = {0.0, 0.0};
    int n = p.grid.n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int c = 0; c < 2; ++c) {
          double d = p.at(i, j, c) - q.at(i, j, c);
          diff_sq[c] += d * d;
          truth_sq[c] += q.at(i, j, c) * q.at(i, j, c);
        }

    auto rel = [](double dsq, double tsq) {
      return std::sqrt(dsq) / std::max(std::sqrt(tsq), kEpsDiv);
    };
    StepError e;
    e.step = static_cast<int>(k);
    e.t = q.t;
    e.rel_u = rel(diff_sq[0], truth_sq[0]);
    e.rel_v = rel(diff_sq[1], truth_sq[1]);
    e.rel_all = rel(diff_sq[0] + diff_sq[1], truth_sq[0] + truth_sq[1]);
    report.steps.push_back(e);
    report.aggregate_u += e.rel_u;
    report.aggregate_v += e.rel_v;
    report.aggregate_all += e.rel_all;
  }
  double count = static_cast<double>(report.steps.size());
  report.aggregate_u /= count;
  report.aggregate_v /= count;
  report.aggregate_all /= count;
  return report;
}

void write_error_csv(const ErrorReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "step,t,rel_l2_u,rel_l2_v,rel_l2_all\n";
  out.precision(17);
  for (const StepError& e : report.steps)
    out << e.step << "," << e.t << "," << e.rel_u << "," << e.rel_v << ","
        << e.rel_all << "\n";
  if (!out) throw IoError("write failed on '" + path + "'");
}

}  // namespace pdnet
