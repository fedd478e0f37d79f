#pragma once

#include <array>
#include <cstddef>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "scopf/instance.hpp"
#include "scopf/nlp_solver.hpp"
#include "scopf/solution.hpp"

namespace scopf {

enum class BlockStatus { fixed_at_max, free, fixed_at_zero };

struct BlockState {
  std::size_t block = 0;
  BlockStatus status = BlockStatus::fixed_at_zero;
  double lo = 0.0;
  double hi = 0.0;
};

struct BlockClassification {
  std::vector<BlockState> blocks;
  double fixed_power() const;
};

/// Merit-order split of the committed interval [p_lo, p_hi] over the cost
/// blocks of `device` at interval t. Blocks wholly below p_lo are fixed at
/// their maximum, blocks above p_hi at zero, the rest are free.
BlockClassification classify_blocks(const Device& device, std::size_t t, bool on, double p_lo, double p_hi);

/// On-state power interval at t after device limits, orchestrator bounds and
/// ramping from the prior interval (with the start allowance of p_min).
std::pair<double, double> ac_power_interval(const Instance& instance, std::size_t t, std::size_t device,
                                            bool prior_on, double prior_p,
                                            std::pair<double, double> bound = {-kInf, kInf});

struct AcStageInput {
  std::size_t t = 0;
  std::vector<bool> on;        // commitment at t
  std::vector<bool> prior_on;  // commitment at t - 1 (initial status for t = 0)
  std::vector<double> prior_p;
  std::vector<std::pair<double, double>> ramp_bounds;  // per device; empty means none
  std::set<std::size_t> opened;                        // branches switched open
};

/// Per-branch flow values and local derivatives over (v_from, v_to, θ_from, θ_to).
struct BranchLocal {
  std::array<double, 4> value;                // p_fr, q_fr, p_to, q_to
  std::array<std::array<double, 4>, 4> grad;  // [quantity][local var]
  std::array<std::array<double, 10>, 4> hess; // [quantity][lower-triangle slot]
};

/// π-model flows of one closed branch at the given voltages and angles.
BranchLocal branch_local(const Branch& branch, double vf, double vt, double thf, double tht);

/// Full-AC single-interval problem with commitment fixed. Variable layout:
/// v (B), θ (B), free block powers (F), q per device (D), then four signed
/// mismatch columns per bus (P+, P-, Q+, Q-). Rows: P and Q balance per bus.
class AcStage : public NlpProblem {
 public:
  AcStage(const Instance& instance, AcStageInput input, bool parallel = false);

  std::size_t num_variables() const override { return lo_.size(); }
  std::size_t num_constraints() const override { return 2 * nb_; }
  bool maximize() const override { return true; }
  const std::vector<double>& lower() const override { return lo_; }
  const std::vector<double>& upper() const override { return hi_; }
  const SparsePattern& jacobian_structure() const override { return jac_; }
  const SparsePattern& hessian_structure() const override { return hess_; }

  double eval_objective(std::span<const double> x) const override;
  void eval_gradient(std::span<const double> x, std::span<double> grad) const override;
  void eval_constraints(std::span<const double> x, std::span<double> c) const override;
  void eval_jacobian(std::span<const double> x, std::span<double> values) const override;
  void eval_hessian(std::span<const double> x, double sigma, std::span<const double> lambda,
                    std::span<double> values) const override;
  std::string variable_name(std::size_t j) const override;

  std::size_t v_index(std::size_t bus) const { return bus; }
  std::size_t theta_index(std::size_t bus) const { return nb_ + bus; }
  std::size_t q_index(std::size_t device) const { return q0_ + device; }
  /// kind: 0 = P+, 1 = P-, 2 = Q+, 3 = Q-
  std::size_t mismatch_index(std::size_t bus, int kind) const { return m0_ + 4 * bus + kind; }
  std::size_t num_free_blocks() const { return q0_ - 2 * nb_; }
  const BlockClassification& classification(std::size_t device) const { return cls_[device]; }
  /// Column of each free block of a device, aligned with its classification.
  const std::vector<std::size_t>& block_columns(std::size_t device) const { return block_cols_[device]; }
  std::pair<double, double> power_interval(std::size_t device) const { return interval_[device]; }
  bool closed(std::size_t branch) const { return closed_[branch]; }

  double device_power(std::span<const double> x, std::size_t device) const;
  /// v = 1, θ = 0, blocks and q at their midpoints, no mismatch.
  std::vector<double> warm_start() const;
  /// Writes dispatch, voltages and statuses for this interval.
  SolutionStep extract(std::span<const double> x) const;

  /// Branch kernel: local flow evaluations for every closed branch. The
  /// parallel flag selects the OpenMP loop; both give identical results.
  void eval_branches(std::span<const double> x, std::vector<BranchLocal>& out, bool parallel) const;

 private:
  struct BranchSlots {
    std::array<std::size_t, 4> col;                   // local var -> column
    std::array<std::array<std::size_t, 4>, 4> jac;    // [quantity][local var] -> jacobian slot
    std::array<std::size_t, 10> hess;                 // lower-triangle slot -> hessian slot
  };

  double overload_weight(std::size_t branch) const;

  const Instance& inst_;
  AcStageInput in_;
  bool parallel_;
  std::size_t nb_, q0_, m0_;
  std::vector<double> lo_, hi_;
  std::vector<BlockClassification> cls_;
  std::vector<std::vector<std::size_t>> block_cols_;
  std::vector<std::pair<double, double>> interval_;
  std::vector<bool> closed_;
  std::vector<std::size_t> closed_list_;
  std::vector<double> obj_lin_;  // linear objective coefficients
  double obj_const_ = 0.0;
  std::vector<double> p_const_;  // fixed block power per bus (net injection)
  std::vector<double> g_sh_, b_sh_;
  SparsePattern jac_, hess_;
  std::vector<std::size_t> jac_lin_;        // slots of constant Jacobian entries
  std::vector<double> jac_lin_val_;
  std::vector<std::size_t> jac_shunt_p_, jac_shunt_q_;  // per bus (v_i) slot or npos
  std::vector<std::size_t> hess_shunt_;                 // per bus (v_i, v_i) slot
  std::vector<BranchSlots> slots_;                      // per closed branch
};

}  // namespace scopf
