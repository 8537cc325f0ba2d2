#include "crfeff/sampling.hpp"

namespace crfeff {

namespace {

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

}  // namespace

Halton::Halton(std::vector<std::pair<double, double>> box, std::uint64_t seed)
    : box_(std::move(box)), index_(1000 + 7919 * seed) {
  if (box_.size() > 10) throw std::invalid_argument("Halton: too many dimensions");
}

Point Halton::next() {
  Point p(box_.size());
  for (size_t d = 0; d < box_.size(); ++d) {
    double t = radical_inverse(index_, kPrimes[d]);
    p[d] = box_[d].first + t * (box_[d].second - box_[d].first);
  }
  ++index_;
  return p;
}

Point Halton::next_admissible(const std::function<bool(const Point&)>& ok,
                              int max_tries) {
  for (int t = 0; t < max_tries; ++t) {
    Point p = next();
    if (ok(p)) return p;
    ++rejections_;
  }
  throw std::runtime_error("Halton: sampling domain appears to be empty");
}

}  // namespace crfeff
