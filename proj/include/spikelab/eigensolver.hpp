#pragma once

#include <Eigen/Dense>

namespace spikelab {

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;  ///< unit norm, sign unspecified
};

struct ExtremeEigenpairs {
  EigenPair top;
  EigenPair bottom;
  int iterations = 0;   ///< Lanczos steps used (0 for the dense path)
  bool dense = false;   ///< true when the dense solver produced the result
};

/// Full spectrum in ascending order (dense symmetric solver).
Eigen::VectorXd spectrum(const Eigen::MatrixXd& symmetric);

/// Largest eigenpair from the dense solver; the reference path.
EigenPair top_eig_dense(const Eigen::MatrixXd& symmetric);

/// Largest and smallest eigenpairs via Lanczos with full reorthogonalisation.
/// Each returned pair satisfies ||Y v - lambda v|| <= 1e-8 ||Y||; when the
/// iteration cannot reach that the dense solver is used instead.
ExtremeEigenpairs extreme_eigs(const Eigen::MatrixXd& symmetric);

/// Largest eigenpair (Lanczos with dense fallback).
EigenPair top_eig(const Eigen::MatrixXd& symmetric);

}  // namespace spikelab
