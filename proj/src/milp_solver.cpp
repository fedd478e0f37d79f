#include "scopf/milp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <queue>

#include "scopf/error.hpp"
#include "scopf/lp_solver.hpp"

namespace scopf {

const char* to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::optimal: return "optimal";
    case MilpStatus::incumbent_time_limit: return "incumbent_time_limit";
    case MilpStatus::infeasible_reported: return "infeasible_reported";
    case MilpStatus::no_incumbent_time_limit: return "no_incumbent_time_limit";
  }
  return "unknown";
}

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kAcceptTol = 1e-6;

using Fixes = std::vector<std::pair<std::size_t, double>>;

struct Node {
  std::uint64_t id = 0;
  double bound = kInf;  // maximization space
  Fixes fixes;
  std::shared_ptr<const Basis> basis;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound < b.bound;
    return a.id > b.id;
  }
};

struct NodeOutcome {
  LpResult lp;
};

class BranchAndBound {
 public:
  BranchAndBound(const Model& model, const SolveOptions& options)
      : model_(model), opt_(options), deadline_(options.time_limit), sign_(model.sense_sign()) {
    lp_opt_ = options;
    lp_opt_.log = nullptr;
    const int workers = std::max(1, options.worker_count);
    for (int w = 0; w < workers; ++w) solvers_.push_back(std::make_unique<SimplexSolver>(model));
    for (std::size_t j = 0; j < model.num_variables(); ++j)
      if (model.variable(j).integrality == Integrality::binary) binaries_.push_back(j);
  }

  MilpResult run();

 private:
  LpResult solve_node(SimplexSolver& solver, const Fixes& fixes, const Basis* basis) {
    solver.reset_bounds();
    for (const auto& [j, v] : fixes) solver.set_column_bounds(j, v, v);
    return solver.solve(lp_opt_, deadline_, basis);
  }

  std::optional<std::size_t> most_fractional(const std::vector<double>& x) const {
    std::optional<std::size_t> pick;
    double best = kIntTol;
    for (std::size_t j : binaries_) {
      const double f = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
      if (f > best + 1e-12) {
        best = f;
        pick = j;
      }
    }
    return pick;
  }

  /// Rounds binaries, re-solves the continuous part and keeps the point when it improves.
  void try_incumbent(const std::vector<double>& x, const Basis* basis) {
    Fixes fixes;
    for (std::size_t j : binaries_) fixes.emplace_back(j, std::round(x[j]));
    LpResult polished = solve_node(*solvers_[0], fixes, basis);
    const std::vector<double>* point = &x;
    if (polished.status == LpStatus::optimal) point = &polished.x;
    std::vector<double> candidate = *point;
    for (std::size_t j : binaries_) candidate[j] = std::round(candidate[j]);
    if (model_.max_violation(candidate, true) > kAcceptTol) return;
    const double value = sign_ * model_.objective_value(candidate);
    if (!incumbent_ || value > incumbent_value_ + 1e-12 * (1 + std::abs(value))) {
      incumbent_ = std::move(candidate);
      incumbent_value_ = value;
    }
  }

  void dive(const LpResult& root) {
    Fixes fixes;
    LpResult cur = root;
    const Deadline limit = deadline_.sub(std::max(0.05 * opt_.time_limit, 0.1));
    while (!limit.expired()) {
      std::vector<std::pair<double, std::size_t>> frac;
      for (std::size_t j : binaries_) {
        const double d = std::abs(cur.x[j] - std::round(cur.x[j]));
        if (d > kIntTol) frac.emplace_back(d, j);
      }
      if (frac.empty()) {
        try_incumbent(cur.x, cur.basis.get());
        return;
      }
      std::sort(frac.begin(), frac.end());
      const std::size_t before = fixes.size();
      for (const auto& [d, j] : frac) {
        if (fixes.size() > before && d > 0.05) break;
        fixes.emplace_back(j, std::round(cur.x[j]));
      }
      LpResult next = solve_node(*solvers_[0], fixes, cur.basis.get());
      if (next.status != LpStatus::optimal) {
        fixes.resize(before + 1);
        fixes.back().second = 1.0 - fixes.back().second;
        next = solve_node(*solvers_[0], fixes, cur.basis.get());
        if (next.status != LpStatus::optimal) return;
      }
      cur = std::move(next);
    }
  }

  double relative_gap(double bound) const {
    if (!incumbent_) return kInf;
    return std::abs(bound - incumbent_value_) / std::max(1.0, std::abs(incumbent_value_));
  }

  bool prunable(double bound) const {
    if (!incumbent_) return false;
    return bound - incumbent_value_ <= std::max(1e-9, opt_.mip_gap * std::max(1.0, std::abs(incumbent_value_)));
  }

  void log_progress(std::size_t iter, double bound, std::size_t nodes) {
    if (!opt_.log) return;
    *opt_.log << "iter=" << iter << " obj=" << (incumbent_ ? sign_ * incumbent_value_ : 0.0)
              << " bound=" << sign_ * bound << " gap=" << relative_gap(bound) << " nodes=" << nodes
              << " elapsed_s=" << deadline_.elapsed() << '\n';
  }

  const Model& model_;
  SolveOptions opt_, lp_opt_;
  Deadline deadline_;
  double sign_;
  std::vector<std::unique_ptr<SimplexSolver>> solvers_;
  std::vector<std::size_t> binaries_;
  std::optional<std::vector<double>> incumbent_;
  double incumbent_value_ = -kInf;
};

MilpResult BranchAndBound::run() {
  MilpResult out;
  if (const auto& start = model_.start(); start && start->size() == model_.num_variables() &&
                                          model_.max_violation(*start, true) <= kAcceptTol) {
    incumbent_ = *start;
    incumbent_value_ = sign_ * model_.objective_value(*start);
  }

  auto finish = [&](MilpStatus status, double bound, std::size_t nodes) {
    out.status = status;
    out.nodes = nodes;
    out.elapsed = deadline_.elapsed();
    if (incumbent_) {
      out.x = *incumbent_;
      out.objective = sign_ * incumbent_value_;
      if (bound < incumbent_value_) bound = incumbent_value_;
      out.bound = sign_ * bound;
      out.gap = relative_gap(bound);
    } else {
      out.bound = sign_ * bound;
      out.gap = kInf;
    }
    log_progress(0, bound, nodes);
    return out;
  };

  LpResult root = solve_node(*solvers_[0], {}, nullptr);
  std::size_t nodes = 1;
  if (root.status == LpStatus::infeasible)
    return finish(incumbent_ ? MilpStatus::optimal : MilpStatus::infeasible_reported,
                  incumbent_ ? incumbent_value_ : -kInf, nodes);
  if (root.status == LpStatus::unbounded) throw NumericError("unbounded LP relaxation");
  if (root.status != LpStatus::optimal) {
    return finish(incumbent_ ? MilpStatus::incumbent_time_limit : MilpStatus::no_incumbent_time_limit,
                  kInf, nodes);
  }

  const double root_bound = sign_ * root.objective;
  if (!most_fractional(root.x)) {
    try_incumbent(root.x, root.basis.get());
    if (incumbent_ && incumbent_value_ >= root_bound - 1e-9 * (1 + std::abs(root_bound)))
      return finish(MilpStatus::optimal, root_bound, nodes);
  } else {
    dive(root);
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::uint64_t next_id = 0;
  open.push(Node{next_id++, root_bound, {}, nullptr});
  std::vector<std::pair<std::uint64_t, LpResult>> cached_root;
  cached_root.emplace_back(0, root);

  const std::size_t workers = solvers_.size();
  std::size_t iter = 0;
  double last_log = -1.0;
  while (!open.empty()) {
    if (prunable(open.top().bound)) break;
    if (deadline_.expired()) break;
    std::vector<Node> batch;
    while (!open.empty() && batch.size() < workers) {
      Node node = open.top();
      open.pop();
      if (prunable(node.bound)) continue;
      batch.push_back(std::move(node));
    }
    std::vector<NodeOutcome> outcomes(batch.size());
    const int count = static_cast<int>(batch.size());
#pragma omp parallel for num_threads(static_cast<int>(workers)) schedule(static, 1)
    for (int i = 0; i < count; ++i) {
      if (batch[i].id == 0 && !cached_root.empty()) {
        outcomes[i].lp = cached_root.front().second;
      } else {
        outcomes[i].lp = solve_node(*solvers_[i], batch[i].fixes, batch[i].basis.get());
      }
    }
    cached_root.clear();
    ++iter;

    for (std::size_t i = 0; i < batch.size(); ++i) {
      Node& node = batch[i];
      LpResult& lp = outcomes[i].lp;
      ++nodes;
      if (lp.status == LpStatus::time_limit || lp.status == LpStatus::iteration_limit ||
          lp.status == LpStatus::numeric_error) {
        if (lp.status == LpStatus::time_limit) open.push(std::move(node));
        continue;
      }
      if (lp.status != LpStatus::optimal) continue;
      const double value = std::min(node.bound, sign_ * lp.objective);
      if (prunable(value)) continue;
      const auto branch = most_fractional(lp.x);
      if (!branch) {
        try_incumbent(lp.x, lp.basis.get());
        continue;
      }
      for (double v : {0.0, 1.0}) {
        Node child{next_id++, value, node.fixes, lp.basis};
        child.fixes.emplace_back(*branch, v);
        open.push(std::move(child));
      }
      if (nodes % 200 == 0) dive(lp);
    }

    if (opt_.log && deadline_.elapsed() - last_log >= 1.0) {
      last_log = deadline_.elapsed();
      log_progress(iter, open.empty() ? incumbent_value_ : std::max(open.top().bound, incumbent_value_),
                   nodes);
    }
  }

  if (open.empty() || prunable(open.top().bound)) {
    const double bound = open.empty() ? incumbent_value_ : open.top().bound;
    return finish(incumbent_ ? MilpStatus::optimal : MilpStatus::infeasible_reported,
                  incumbent_ ? bound : -kInf, nodes);
  }
  return finish(incumbent_ ? MilpStatus::incumbent_time_limit : MilpStatus::no_incumbent_time_limit,
                open.top().bound, nodes);
}

}  // namespace

MilpResult solve_milp(const Model& model, const SolveOptions& options) {
  options.validate();
  if (options.worker_count < 1) throw ContractError("worker_count must be >= 1");
  BranchAndBound bb(model, options);
  return bb.run();
}

}  // namespace scopf
