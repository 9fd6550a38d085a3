#pragma once

#include "rgbps/field.hpp"
#include "rgbps/local_inference.hpp"
#include "rgbps/patch_basis.hpp"
#include "rgbps/patch_grid.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace rgbps {

/// How a_step picks between the outlier branch and the candidate branches.
enum class SelectionRule {
  /// Minimize the complete per-patch objective, including the lambda term.
  /// This makes a_step an exact block minimizer.
  FullObjective,
  /// Compare s_k + |G(a_k' - a_k)|^2 against gamma, omitting the lambda term.
  Shortcut,
};

struct SolverConfig {
  double gamma = 4.0;
  double lambda_init = 0x1p-64;
  double lambda_factor = 1.4142135623730951;
  double lambda_final = 256.0;
  int iterations = 145;
  SelectionRule rule = SelectionRule::FullObjective;
  /// Stop once lambda has reached its final value and the relative objective
  /// change of an iteration falls below this. 0 disables early stopping.
  double relative_tolerance = 0.0;
  /// Evaluate the objective before and after each step (costs one extra pass).
  bool trace_objective = false;

  /// Throws InputError unless gamma > 0, 0 < lambda_init <= lambda_final,
  /// factor > 1 (or init == final) and the schedule reaches lambda_final
  /// within `iterations`.
  void validate() const;
  /// lambda_init * factor^i, held at lambda_final.
  double lambda_at(int iteration) const;
};

/// Variables of the consensus objective.
struct SolverState {
  /// Per-pixel gradient field n(p); column y * width + x.
  Eigen::Matrix2Xd gradients;
  /// Pixels covered by at least one patch.
  Mask covered;
  /// Per-patch coefficients a_m, one column per patch.
  Eigen::MatrixXd coeffs;
  /// 0 = outlier branch, k + 1 = local candidate k.
  std::vector<int> selection;
};

struct IterationLog {
  int iteration = 0;
  double lambda = 0.0;
  double objective_start = 0.0;
  double objective_after_n = 0.0;
  double objective_after_a = 0.0;
  int outliers = 0;
};

/// Consensus problem over fixed local distributions: owns the whitened copies
/// of the candidates (|G x| = |W x|) so each a_step costs O(K n_coeff) per patch.
class ConsensusProblem {
 public:
  ConsensusProblem(const LocalDistributions& dists, const PatchGrid& patches, const BasisMatrix& basis);

  const LocalDistributions& distributions() const { return dists_; }
  const PatchGrid& patches() const { return patches_; }
  const BasisMatrix& basis() const { return basis_; }

  /// a_m = lowest-score candidate (ties: lowest k); patches without valid
  /// candidates start at zero as outliers. Gradients are then set by n_step.
  SolverState initialize() const;

  /// n(p) = mean over covering patches of (G a_m)(p).
  void n_step(SolverState& state) const;

  /// Per patch: a0 = P n_m, candidates (a_k + lambda a0) / (1 + lambda), pick
  /// the branch selected by `rule`.
  void a_step(SolverState& state, double lambda, double gamma, SelectionRule rule) const;

  /// sum_m lambda |n_m - G a_m|^2 + min(gamma, min_k s_k + |G(a_m - a_k)|^2).
  double objective(const SolverState& state, double lambda, double gamma) const;

 private:
  Eigen::MatrixXd patch_gradients(const SolverState& state, int begin, int end) const;

  const LocalDistributions& dists_;
  const PatchGrid& patches_;
  const BasisMatrix& basis_;
  Eigen::MatrixXd whitened_;  // W a_{m:k}, column m * K + k
};

struct SolveResult {
  GradientField gradients;
  NormalField normals;
  std::vector<int> selection;
  std::vector<IterationLog> trace;
  double objective = 0.0;
  int iterations_run = 0;
};

/// Alternating minimization over the lambda schedule.
SolveResult solve(const LocalDistributions& dists, const PatchGrid& patches, const BasisMatrix& basis,
                  const SolverConfig& config = {});

/// Fraction of covering patches selected as outliers, per pixel.
ScalarMap outlier_fraction(const PatchGrid& patches, const std::vector<int>& selection);

}  // namespace rgbps
