#pragma once

#include "meq/dense.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace meq {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct IterationRecord {
  int k = 0;
  double residual_rel = kNaN;
  double error_fro_rel = kNaN;
  double error_snorm_rel = kNaN;
  double theta_min = kNaN;
  double theta_max = kNaN;
  double seconds = 0.0;  // cumulative wall time when the iterate was accepted
};

enum class StopReason { converged, max_iterations, breakdown, stalled };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::converged: return "converged";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::breakdown: return "breakdown";
    case StopReason::stalled: return "stalled";
  }
  return "?";
}

/// Factored approximation X_k = V Y W^T with its per-iteration history.
struct ProjectionSolution {
  Matrix V;
  Matrix W;  // equals V for one-space solvers
  Matrix Y;
  std::vector<IterationRecord> history;
  std::vector<Matrix> cores;  // per-step Y_k when requested; bases are nested,
                              // so step k uses V.leftCols(cores[k].rows())
  StopReason stop = StopReason::max_iterations;
  std::vector<std::string> warnings;

  Matrix reconstruct() const { return V * Y * W.transpose(); }
  int iterations() const { return static_cast<int>(history.size()); }
  bool converged() const { return stop == StopReason::converged; }
  double final_residual_rel() const {
    return history.empty() ? kNaN : history.back().residual_rel;
  }
};

namespace csv {

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace csv

/// Comma-separated history with a header row, 17 significant digits, LF line
/// endings. Missing values render as nan.
inline void write_history_csv(std::ostream& out,
                              const std::vector<IterationRecord>& history,
                              bool zero_seconds = false) {
  out << "k,residual_rel,error_fro_rel,error_snorm_rel,theta_min,theta_max,seconds\n";
  for (const IterationRecord& r : history) {
    out << r.k << ',' << csv::format_value(r.residual_rel) << ','
        << csv::format_value(r.error_fro_rel) << ','
        << csv::format_value(r.error_snorm_rel) << ','
        << csv::format_value(r.theta_min) << ',' << csv::format_value(r.theta_max)
        << ',' << csv::format_value(zero_seconds ? 0.0 : r.seconds) << '\n';
  }
}

inline void write_history_csv(const std::string& path,
                              const std::vector<IterationRecord>& history,
                              bool zero_seconds = false) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_history_csv: cannot open " + path);
  write_history_csv(out, history, zero_seconds);
  if (!out) throw std::runtime_error("write_history_csv: write failed for " + path);
}

}  // namespace meq
