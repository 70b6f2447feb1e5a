#pragma once

#include <string>
#include <vector>

#include "pdnet/grid.hpp"

namespace pdnet {

inline constexpr double kEpsDiv = 1e-12;  // guards relative norms on null fields

struct StepError {
  int step = 0;
  double t = 0.0;
  double rel_u = 0.0;    // channel 0
  double rel_v = 0.0;    // channel 1
  double rel_all = 0.0;  // both channels jointly
};

struct ErrorReport {
  std::vector<StepError> steps;
  double aggregate_u = 0.0;  // means over steps
  double aggregate_v = 0.0;
  double aggregate_all = 0.0;
};

// Per step k, ||pred_k - truth_k||_2 / max(||truth_k||_2, kEpsDiv), per
// channel and over the full state; aggregate is the mean over steps.
// Sequences must agree in length, grid, channel count (2), and timestamps
// (tolerance 1e-9 on t).
ErrorReport relative_l2_error(const FieldSequence& pred, const FieldSequence& truth);

// CSV with header step,t,rel_l2_u,rel_l2_v,rel_l2_all, one row per step.
void write_error_csv(const ErrorReport& report, const std::string& path);

}  // namespace pdnet
