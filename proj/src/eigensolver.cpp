#include "spikelab/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spikelab/errors.hpp"

namespace spikelab {

namespace {

constexpr double kResidualTolerance = 1e-8;
constexpr Eigen::Index kDenseCutoff = 64;

ExtremeEigenpairs dense_extremes(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) throw NumericError("dense symmetric eigensolver failed");
  const Eigen::Index n = a.rows();
  ExtremeEigenpairs out;
  out.top = {solver.eigenvalues()(n - 1), solver.eigenvectors().col(n - 1)};
  out.bottom = {solver.eigenvalues()(0), solver.eigenvectors().col(0)};
  out.dense = true;
  return out;
}

double residual(const Eigen::MatrixXd& a, const EigenPair& p) {
  return (a * p.vector - p.value * p.vector).norm();
}

}  // namespace

Eigen::VectorXd spectrum(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("dense symmetric eigensolver failed");
  return solver.eigenvalues();
}

EigenPair top_eig_dense(const Eigen::MatrixXd& symmetric) {
  return dense_extremes(symmetric).top;
}

ExtremeEigenpairs extreme_eigs(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ConfigError("eigensolver needs a square matrix");
  const Eigen::Index n = a.rows();
  if (n <= kDenseCutoff) return dense_extremes(a);

  const Eigen::Index max_steps = std::min<Eigen::Index>(n, 400);
  Eigen::MatrixXd basis(n, max_steps + 1);
  std::vector<double> alpha, beta;
  alpha.reserve(max_steps);
  beta.reserve(max_steps);

  // Deterministic start vector with no special structure.
  Eigen::VectorXd q(n);
  for (Eigen::Index i = 0; i < n; ++i) q(i) = 1.0 + 0.5 * std::sin(1.2345 * static_cast<double>(i) + 0.1);
  q.normalize();
  basis.col(0) = q;

  Eigen::VectorXd w(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
  Eigen::Index steps = 0;
  bool converged = false;
  double norm_estimate = 0.0;

  for (Eigen::Index k = 0; k < max_steps; ++k) {
    w.noalias() = a * basis.col(k);
    const double ak = basis.col(k).dot(w);
    w -= ak * basis.col(k);
    if (k > 0) w -= beta.back() * basis.col(k - 1);
    // Full reorthogonalisation, twice.
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd coeff = basis.leftCols(k + 1).transpose() * w;
      w.noalias() -= basis.leftCols(k + 1) * coeff;
    }
    alpha.push_back(ak);
    const double bk = w.norm();
    steps = k + 1;

    const bool check = steps % 8 == 0 || steps == max_steps || bk == 0.0;
    if (check) {
      Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), steps);
      Eigen::VectorXd sub = steps > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), steps - 1))
                                      : Eigen::VectorXd();
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const auto& theta = tri.eigenvalues();
      norm_estimate = std::max(std::abs(theta(0)), std::abs(theta(steps - 1)));
      const double tol = 1e-3 * kResidualTolerance * std::max(norm_estimate, 1e-300);
      const double r_top = std::abs(bk * tri.eigenvectors()(steps - 1, steps - 1));
      const double r_bot = std::abs(bk * tri.eigenvectors()(steps - 1, 0));
      if ((r_top <= tol && r_bot <= tol) || bk <= 1e-14 * norm_estimate) {
        converged = true;
        break;
      }
    }
    beta.push_back(bk);
    basis.col(k + 1) = w / bk;
  }

  if (converged) {
    ExtremeEigenpairs out;
    out.iterations = static_cast<int>(steps);
    const auto& s = tri.eigenvectors();
    out.top.value = tri.eigenvalues()(steps - 1);
    out.top.vector = (basis.leftCols(steps) * s.col(steps - 1)).normalized();
    out.bottom.value = tri.eigenvalues()(0);
    out.bottom.vector = (basis.leftCols(steps) * s.col(0)).normalized();
    const double scale = std::max(norm_estimate, 1e-300);
    if (residual(a, out.top) <= kResidualTolerance * scale &&
        residual(a, out.bottom) <= kResidualTolerance * scale) {
      return out;
    }
  }
  ExtremeEigenpairs out = dense_extremes(a);
  out.iterations = static_cast<int>(steps);
  const double scale = std::max(std::abs(out.top.value), std::abs(out.bottom.value));
  if (residual(a, out.top) > kResidualTolerance * scale * 10.0) {
    std::ostringstream msg;
    msg << "eigensolver failed to converge after " << steps << " Lanczos steps and the dense fallback";
    throw NumericError(msg.str());
  }
  return out;
}

EigenPair top_eig(const Eigen::MatrixXd& symmetric) { return extreme_eigs(symmetric).top; }

}  // namespace spikelab
