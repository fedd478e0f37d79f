#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "scopf/instance.hpp"
#include "scopf/solution.hpp"

namespace scopf {

/// A broken hard constraint with the size of the breach.
struct HardViolation {
  std::string entity;
  std::size_t t = 0;
  std::string rule;  // bounds, commitment, uptime, downtime, max_starts, energy, ramp, voltage, switching, reserve
  double magnitude = 0.0;
};

/// A penalized residual: bus imbalance, branch overload or reserve shortfall.
struct SoftQuantity {
  std::string entity;
  std::size_t t = 0;
  std::string kind;  // p_mismatch, q_mismatch, overload, reserve_up, reserve_down
  double magnitude = 0.0;
};

struct ViolationReport {
  std::vector<HardViolation> hard;
  std::vector<SoftQuantity> soft;
  bool valid() const { return hard.empty(); }
  std::size_t count(const std::string& rule) const;
};

/// Complex power injected into the network at every bus, S = V conj(Y V),
/// with shunts on the diagonal of Y. Dense admittance below 2000 buses.
std::vector<std::complex<double>> network_injections(const Instance& instance, const SolutionStep& step,
                                                     std::size_t t);

/// Recomputes every surplus term from the raw solution values. Throws
/// ContractError when the solution does not match the instance shape.
ScoreBreakdown market_surplus(const Solution& solution, const Instance& instance);

/// Hard checks and soft residuals of a solution, tolerance `tol`.
ViolationReport feasibility_report(const Solution& solution, const Instance& instance, double tol = 1e-6);

struct PostOutageFlow {
  std::size_t branch = 0;
  double flow = 0.0;
  double s_max = 0.0;
};

struct OutageResult {
  std::size_t outage = 0;  // branch index
  std::size_t t = 0;
  bool screenable = true;  // false when the outage islands the network
  std::vector<double> flows;  // post-outage flow per branch (0 on the outaged or open ones)
  std::vector<PostOutageFlow> overloads;
};

struct ContingencyReport {
  std::vector<OutageResult> outages;
  std::size_t overload_count() const;
  std::size_t unscreenable_count() const;
};

/// Every branch closed at some interval.
std::vector<std::size_t> all_single_outages(const Instance& instance);

/// DC line-outage distribution screening of the base-case angles. The
/// parallel flag splits the outage loop across OpenMP threads; both paths
/// give identical reports.
ContingencyReport contingency_screen(const Solution& solution, const Instance& instance,
                                     const std::vector<std::size_t>& outages, bool parallel = true);

/// score / best. Throws ContractError unless best > 0.
double scaled_score(double score, double best);

}  // namespace scopf
