#include "rgbps/global_solver.hpp"

#include "rgbps/parallel.hpp"
#include "rgbps/render.hpp"

#include <cmath>
#include <limits>

namespace rgbps {

namespace {

constexpr int kChunk = 256;

}  // namespace

void SolverConfig::validate() const {
  if (!(gamma > 0.0)) throw InputError("solver: gamma must be > 0");
  if (!(lambda_init > 0.0) || !(lambda_final >= lambda_init)) {
    throw InputError("solver: need 0 < lambda_init <= lambda_final");
  }
  if (iterations < 1) throw InputError("solver: iterations must be >= 1");
  if (!(lambda_factor >= 1.0)) throw InputError("solver: lambda_factor must be >= 1");
  if (lambda_init < lambda_final) {
    const double reached = lambda_init * std::pow(lambda_factor, iterations - 1);
    if (!(reached >= lambda_final * (1.0 - 1e-9))) {
      throw InputError("solver: lambda schedule does not reach lambda_final within the iteration count");
    }
  }
  if (!(relative_tolerance >= 0.0)) throw InputError("solver: relative_tolerance must be >= 0");
}

double SolverConfig::lambda_at(int iteration) const {
  const double lambda = lambda_init * std::pow(lambda_factor, iteration);
  return lambda >= lambda_final * (1.0 - 1e-12) ? lambda_final : lambda;
}

ConsensusProblem::ConsensusProblem(const LocalDistributions& dists, const PatchGrid& patches,
                                   const BasisMatrix& basis)
    : dists_(dists), patches_(patches), basis_(basis) {
  if (dists.patch_count() != patches.size()) throw InputError("solver: distributions do not match patch grid");
  if (patches.side() != basis.geometry().patch_side) throw InputError("solver: patch size does not match basis");
  if (dists.candidate_count() > 0 && dists.coeff_count() != basis.coeffs()) {
    throw InputError("solver: coefficient count does not match basis");
  }
  const auto& all = dists.coeff_matrix();
  whitened_.resize(basis.coeffs(), all.cols());
  const Eigen::Index per_chunk = Eigen::Index(kChunk) * std::max(dists.candidate_count(), 1);
  parallel_chunks(all.cols(), per_chunk, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    whitened_.middleCols(begin, end - begin) = basis.whitener() * all.middleCols(begin, end - begin);
  });
}

Eigen::MatrixXd ConsensusProblem::patch_gradients(const SolverState& state, int begin, int end) const {
  const int side = patches_.side();
  const int width = patches_.width();
  Eigen::MatrixXd out(2 * side * side, end - begin);
  for (int m = begin; m < end; ++m) {
    const auto& a = patches_.anchor(m);
    double* col = out.col(m - begin).data();
    for (int dy = 0; dy < side; ++dy) {
      const Eigen::Index row = Eigen::Index(a.y + dy) * width + a.x;
      for (int dx = 0; dx < side; ++dx, col += 2) {
        col[0] = state.gradients(0, row + dx);
        col[1] = state.gradients(1, row + dx);
      }
    }
  }
  return out;
}

SolverState ConsensusProblem::initialize() const {
  const int M = patches_.size();
  const int K = dists_.candidate_count();
  SolverState state;
  state.coeffs = Eigen::MatrixXd::Zero(basis_.coeffs(), M);
  state.selection.assign(std::size_t(M), 0);
  for (int m = 0; m < M; ++m) {
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      if (dists_.valid(m, k) && dists_.score(m, k) < best) {
        best = dists_.score(m, k);
        state.selection[std::size_t(m)] = k + 1;
      }
    }
    if (state.selection[std::size_t(m)] > 0) state.coeffs.col(m) = dists_.coeffs(m, state.selection[std::size_t(m)] - 1);
  }
  state.gradients = Eigen::Matrix2Xd::Zero(2, Eigen::Index(patches_.width()) * patches_.height());
  state.covered = patches_.coverage();
  n_step(state);
  return state;
}

void ConsensusProblem::n_step(SolverState& state) const {
  const int M = patches_.size();
  const int side = patches_.side();
  const int width = patches_.width();
  const int height = patches_.height();

  Eigen::MatrixXd predicted(basis_.rows(), M);
  parallel_chunks(M, kChunk, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    predicted.middleCols(begin, end - begin) = basis_.matrix() * state.coeffs.middleCols(begin, end - begin);
  });

  // Gather in a fixed anchor order so the mean does not depend on scheduling.
  parallel_chunks(height, 4, [&](std::ptrdiff_t y0, std::ptrdiff_t y1) {
    for (int y = int(y0); y < int(y1); ++y) {
      for (int x = 0; x < width; ++x) {
        const Eigen::Index p = Eigen::Index(y) * width + x;
        double gx = 0.0, gy = 0.0;
        int count = 0;
        for (int dy = side - 1; dy >= 0; --dy) {
          for (int dx = side - 1; dx >= 0; --dx) {
            const int m = patches_.at(x - dx, y - dy);
            if (m < 0) continue;
            const int row = 2 * (dy * side + dx);
            gx += predicted(row, m);
            gy += predicted(row + 1, m);
            ++count;
          }
        }
        if (count > 0) {
          state.gradients(0, p) = gx / count;
          state.gradients(1, p) = gy / count;
        } else {
          state.gradients.col(p).setZero();
        }
      }
    }
  });
}

void ConsensusProblem::a_step(SolverState& state, double lambda, double gamma, SelectionRule rule) const {
  if (!(lambda > 0.0)) throw InputError("a_step: lambda must be > 0");
  const int K = dists_.candidate_count();
  const double shrink = lambda / (1.0 + lambda);
  const double weight = rule == SelectionRule::FullObjective ? shrink : shrink * shrink;

  parallel_chunks(patches_.size(), kChunk, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    const Eigen::MatrixXd observed = patch_gradients(state, int(begin), int(end));
    const Eigen::MatrixXd projected = basis_.projector() * observed;
    const Eigen::MatrixXd whitened = basis_.whitener() * projected;
    for (int m = int(begin); m < int(end); ++m) {
      const Eigen::Index j = m - begin;
      double best = gamma;
      int choice = 0;
      for (int k = 0; k < K; ++k) {
        if (!dists_.valid(m, k)) continue;
        const double d = (whitened.col(j) - whitened_.col(Eigen::Index(m) * K + k)).squaredNorm();
        const double cost = dists_.score(m, k) + weight * d;
        if (cost < best) {
          best = cost;
          choice = k + 1;
        }
      }
      state.selection[std::size_t(m)] = choice;
      if (choice == 0) {
        state.coeffs.col(m) = projected.col(j);
      } else {
        state.coeffs.col(m) = (dists_.coeffs(m, choice - 1) + lambda * projected.col(j)) / (1.0 + lambda);
      }
    }
  });
}

double ConsensusProblem::objective(const SolverState& state, double lambda, double gamma) const {
  const int M = patches_.size();
  const int K = dists_.candidate_count();
  std::vector<double> terms(std::size_t(M), 0.0);
  parallel_chunks(M, kChunk, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    const Eigen::MatrixXd observed = patch_gradients(state, int(begin), int(end));
    const auto coeffs = state.coeffs.middleCols(begin, end - begin);
    const Eigen::MatrixXd predicted = basis_.matrix() * coeffs;
    const Eigen::MatrixXd whitened = basis_.whitener() * coeffs;
    for (int m = int(begin); m < int(end); ++m) {
      const Eigen::Index j = m - begin;
      double fidelity = gamma;
      for (int k = 0; k < K; ++k) {
        if (!dists_.valid(m, k)) continue;
        const double d = (whitened.col(j) - whitened_.col(Eigen::Index(m) * K + k)).squaredNorm();
        fidelity = std::min(fidelity, dists_.score(m, k) + d);
      }
      terms[std::size_t(m)] = lambda * (observed.col(j) - predicted.col(j)).squaredNorm() + fidelity;
    }
  });
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

SolveResult solve(const LocalDistributions& dists, const PatchGrid& patches, const BasisMatrix& basis,
                  const SolverConfig& config) {
  config.validate();
  const ConsensusProblem problem(dists, patches, basis);
  SolverState state = problem.initialize();

  SolveResult result;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int it = 0; it < config.iterations; ++it) {
    const double lambda = config.lambda_at(it);
    IterationLog log;
    log.iteration = it;
    log.lambda = lambda;
    if (config.trace_objective) log.objective_start = problem.objective(state, lambda, config.gamma);
    problem.n_step(state);
    if (config.trace_objective) log.objective_after_n = problem.objective(state, lambda, config.gamma);
    problem.a_step(state, lambda, config.gamma, config.rule);
    const bool need_objective = config.trace_objective || config.relative_tolerance > 0.0;
    if (need_objective) log.objective_after_a = problem.objective(state, lambda, config.gamma);
    for (int s : state.selection) log.outliers += s == 0;
    result.iterations_run = it + 1;
    if (config.trace_objective) result.trace.push_back(log);

    if (config.relative_tolerance > 0.0 && lambda == config.lambda_final) {
      const double current = log.objective_after_a;
      if (std::isfinite(previous) && std::abs(previous - current) <= config.relative_tolerance * std::abs(previous)) {
        break;
      }
      previous = current;
    }
  }
  // Final gradient field consistent with the last coefficients.
  problem.n_step(state);
  result.objective = problem.objective(state, config.lambda_at(result.iterations_run - 1), config.gamma);

  result.gradients = GradientField(patches.width(), patches.height());
  result.gradients.data() = state.gradients;
  result.gradients.set_mask(state.covered);
  result.normals = gradients_to_normals(result.gradients);
  result.selection = std::move(state.selection);
  return result;
}

ScalarMap outlier_fraction(const PatchGrid& patches, const std::vector<int>& selection) {
  if (int(selection.size()) != patches.size()) throw InputError("outlier_fraction: selection size mismatch");
  ScalarMap out(patches.width(), patches.height());
  std::vector<int> total(std::size_t(out.size()), 0), outliers(std::size_t(out.size()), 0);
  const int side = patches.side();
  for (int m = 0; m < patches.size(); ++m) {
    const auto& a = patches.anchor(m);
    for (int dy = 0; dy < side; ++dy) {
      for (int dx = 0; dx < side; ++dx) {
        const auto p = std::size_t(a.y + dy) * patches.width() + a.x + dx;
        ++total[p];
        outliers[p] += selection[std::size_t(m)] == 0;
      }
    }
  }
  for (Eigen::Index p = 0; p < out.size(); ++p) {
    out.set_valid(p, total[std::size_t(p)] > 0);
    out[p](0) = total[std::size_t(p)] > 0 ? double(outliers[std::size_t(p)]) / total[std::size_t(p)] : 0.0;
  }
  return out;
}

}  // namespace rgbps
