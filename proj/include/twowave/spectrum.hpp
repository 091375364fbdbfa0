#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "twowave/generator.hpp"

namespace twowave {

using Complex = std::complex<double>;

/// Largest chain size accepted by the dense eigensolver (state size 4n).
inline constexpr Index kDenseChainLimit = 2000;

struct SpectrumResult {
  std::vector<Complex> eigenvalues;  // sorted by (imag, real)
  double spectral_abscissa = 0.0;    // max Re
  double imag_axis_gap = 0.0;        // min |Re|
  double mesh_h = 0.0;
  /// Column j is the eigenvector of eigenvalues[j] in state coordinates
  /// (only filled on request).
  Eigen::MatrixXcd vectors;
};

/// The generator written in coordinates where the energy norm is Euclidean:
/// with H = G^T G, G = diag(Lp^T, Lm^T) from Cholesky factors of the position
/// and velocity blocks,
///   G A_h G^{-1} = [[0, B^T], [-B, -Lm^{-1} C Lm^{-T}]],   B = Lm^{-1} Lp.
/// This is the first-companion linearization of Mb p'' + C p' + K p = 0
/// after a congruence that makes the energy inner product the identity.
class EnergyFrame {
 public:
  explicit EnergyFrame(const GeneratorOperator& gen);

  const Eigen::MatrixXd& matrix() const { return a_hat_; }
  const Eigen::MatrixXd& coupling() const { return b_; }
  /// x = G^{-1} x_hat.
  Eigen::VectorXcd to_state(const Eigen::VectorXcd& x_hat) const;
  /// x_hat = G x.
  Eigen::VectorXcd from_state(const Eigen::VectorXcd& x) const;

 private:
  Index n2_ = 0;
  Eigen::MatrixXd lp_;  // lower Cholesky factor of K
  Eigen::MatrixXd lm_;  // lower Cholesky factor of Mb
  Eigen::MatrixXd b_;
  Eigen::MatrixXd a_hat_;
};

/// All eigenvalues of A_h by a dense solve in the energy frame. When the
/// generator is conservative (C == 0) the frame matrix is skew and the
/// eigenvalues are +-i sigma_k(B), computed from an SVD of B.
/// SizeExceeded when the chain size exceeds kDenseChainLimit.
SpectrumResult eigenvalues(const GeneratorOperator& gen, bool with_vectors = false);

/// The k eigenvalues closest to i*frequency by shift-invert Arnoldi on the
/// sparse pencil. ConvergenceFailure if the Ritz values do not settle.
SpectrumResult eigenvalues_near(const GeneratorOperator& gen, double frequency, int k,
                                bool with_vectors = false);

/// ||A_h x - lambda x||_H / ||x||_H, evaluated with the sparse operator.
double eigen_residual(const GeneratorOperator& gen, Complex lambda, const Eigen::VectorXcd& x);

struct ResolventValue {
  double norm = 0.0;
  bool near_singular = false;  // i*lambda sits on an (almost) imaginary eigenvalue
};

/// Evaluates lambda -> ||(i lambda I - A_h)^{-1}||_H from one complex Schur
/// form T of the energy-frame matrix: the norm equals 1 / sigma_min(i lambda - T),
/// found by Lanczos on ((i lambda - T)^* (i lambda - T))^{-1} with two
/// triangular solves per step.
class ResolventEvaluator {
 public:
  explicit ResolventEvaluator(const GeneratorOperator& gen);

  ResolventValue operator()(double lambda) const;
  const std::vector<Complex>& eigenvalues() const { return eigenvalues_; }
  double mesh_h() const { return mesh_h_; }

 private:
  Eigen::MatrixXcd t_;
  std::vector<Complex> eigenvalues_;
  double mesh_h_ = 0.0;
};

/// One-shot evaluation (builds a ResolventEvaluator).
ResolventValue resolvent_norm(const GeneratorOperator& gen, double lambda);

/// Reference value by a dense SVD of G (i lambda I - A_h) G^{-1}.
double resolvent_norm_dense(const GeneratorOperator& gen, double lambda);

/// Highest frequency trusted for exponent fits: 0.2 * pi / h.
double frequency_cutoff(double mesh_h);

std::vector<double> log_grid(double lambda_min, double lambda_max, int points);

struct SweepOptions {
  /// Add the imaginary parts of eigenvalues inside the band as sample points,
  /// so narrow resonance peaks are not stepped over.
  bool include_eigenfrequencies = true;
  /// Golden-section refinement of each sampled local maximum.
  bool refine_peaks = true;
  /// The envelope at a local maximum lambda_i is the largest sampled norm on
  /// [lambda_i / envelope_window, lambda_i] (dyadic shells by default).
  double envelope_window = 2.0;
  /// Minimum number of envelope points for a fit.
  int min_envelope_points = 8;
};

struct ResolventSamples {
  std::vector<double> lambdas;     // ascending
  std::vector<double> norms;
  std::vector<bool> is_envelope;   // local maxima of the sampled curve
  std::vector<double> envelope;     // shell sup at envelope points, NaN elsewhere
  std::vector<bool> near_singular;
  double fitted_exponent = 0.0;
  double fit_intercept = 0.0;      // log(norm) = intercept + exponent * log(lambda)
  double r_squared = 0.0;
  double band_min = 0.0;
  double band_max = 0.0;
  std::size_t dropped_points = 0;  // grid points above the cutoff
  std::size_t envelope_points() const;
  bool any_near_singular() const;
};

/// Samples the resolvent norm over the grid (points above the cutoff are
/// dropped), extracts the upper envelope and fits its power-law exponent.
/// BandTooNarrow when fewer than min_envelope_points envelope points remain.
ResolventSamples resolvent_sweep(const ResolventEvaluator& eval, std::span<const double> grid,
                                 const SweepOptions& opts = {});

}  // namespace twowave
