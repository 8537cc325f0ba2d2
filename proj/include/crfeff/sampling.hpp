#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "crfeff/expr.hpp"

namespace crfeff {

/// Low-discrepancy (Halton) sampler over a coordinate box.  Deterministic
/// for a given seed; rejected points are counted so reports can record the
/// rejection rate.
class Halton {
 public:
  Halton(std::vector<std::pair<double, double>> box, std::uint64_t seed);

  Point next();
  Point next_admissible(const std::function<bool(const Point&)>& ok,
                        int max_tries = 10000);

  std::uint64_t rejections() const { return rejections_; }

 private:
  std::vector<std::pair<double, double>> box_;
  std::uint64_t index_;
  std::uint64_t rejections_ = 0;
};

}  // namespace crfeff
