#pragma once

#include <chrono>
#include <iosfwd>

namespace scopf {

struct SolveOptions {
  double time_limit = 60.0;  // seconds
  double mip_gap = 1e-4;
  double feas_tol = 1e-7;
  double opt_tol = 1e-7;
  int worker_count = 1;
  std::ostream* log = nullptr;  // receives one line per progress report when set

  /// Throws ContractError unless time_limit > 0 and tolerances lie in (0, 1e-2].
  void validate() const;
};

/// Wall-clock deadline shared by nested solver calls.
class Deadline {
 public:
  using clock = std::chrono::steady_clock;

  explicit Deadline(double seconds)
      : start_(clock::now()), end_(start_ + std::chrono::duration_cast<clock::duration>(
                                                std::chrono::duration<double>(seconds))) {}
  Deadline(clock::time_point start, clock::time_point end) : start_(start), end_(end) {}

  bool expired() const { return clock::now() >= end_; }
  double remaining() const { return std::chrono::duration<double>(end_ - clock::now()).count(); }
  double elapsed() const { return std::chrono::duration<double>(clock::now() - start_).count(); }
  /// A nested deadline that ends no later than this one.
  Deadline sub(double seconds) const {
    auto now = clock::now();
    auto end = now + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(seconds));
    return Deadline(now, end < end_ ? end : end_);
  }

 private:
  clock::time_point start_, end_;
};

}  // namespace scopf
