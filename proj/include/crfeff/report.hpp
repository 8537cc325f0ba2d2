#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "crfeff/expr.hpp"

namespace crfeff {

/// One verified condition: max residual over the sampled points against a
/// tolerance.  `lower_bound` entries pass when the value EXCEEDS the
/// threshold (twist, strict-negativity margins, non-flatness checks).
struct ReportEntry {
  std::string suite;
  std::string condition;
  double value = 0.0;       // max residual (or the diagnostic value)
  double threshold = 0.0;
  bool lower_bound = false;
  bool pass = false;
  Point worst_point;

  static ReportEntry residual(std::string suite, std::string condition, double value,
                              double tol, Point worst);
  static ReportEntry bound(std::string suite, std::string condition, double value,
                           double threshold, Point worst);
};

struct VerificationReport {
  std::string geometry;
  std::string suite_selection;
  std::uint64_t seed = 0;
  int points = 0;
  int order = 0;  // 0 = per-suite defaults
  std::uint64_t rejections = 0;
  std::vector<ReportEntry> entries;

  bool overall_pass() const;
  /// Line-delimited records with stable keys (one JSON object per line,
  /// final line is the run summary).
  std::string to_ldjson() const;
  std::string to_table() const;

  /// Inverse of to_ldjson (lossless for serialized reports).
  static VerificationReport from_ldjson(const std::string& text);
};

}  // namespace crfeff
