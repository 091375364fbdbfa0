#include "twowave/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

namespace twowave {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

void finish(SpectrumResult& r) {
  std::vector<std::size_t> order(r.eigenvalues.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Complex& x = r.eigenvalues[a];
    const Complex& y = r.eigenvalues[b];
    if (x.imag() != y.imag()) return x.imag() < y.imag();
    return x.real() < y.real();
  });
  std::vector<Complex> sorted;
  sorted.reserve(order.size());
  for (auto i : order) sorted.push_back(r.eigenvalues[i]);
  if (r.vectors.cols() == static_cast<Index>(order.size())) {
    MatrixXcd v(r.vectors.rows(), r.vectors.cols());
    for (std::size_t j = 0; j < order.size(); ++j) {
      v.col(static_cast<Index>(j)) = r.vectors.col(static_cast<Index>(order[j]));
    }
    r.vectors = std::move(v);
  }
  r.eigenvalues = std::move(sorted);
  r.spectral_abscissa = -std::numeric_limits<double>::infinity();
  r.imag_axis_gap = std::numeric_limits<double>::infinity();
  for (const Complex& z : r.eigenvalues) {
    r.spectral_abscissa = std::max(r.spectral_abscissa, z.real());
    r.imag_axis_gap = std::min(r.imag_axis_gap, std::abs(z.real()));
  }
}

VectorXcd fixed_start(Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorXcd v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(dist(rng), dist(rng));
  return v.normalized();
}

}  // namespace

EnergyFrame::EnergyFrame(const GeneratorOperator& gen) : n2_(2 * gen.chain_size()) {
  const MatrixXd k = MatrixXd(gen.stiffness_block());
  const MatrixXd mb = MatrixXd(gen.mass_block());
  Eigen::LLT<MatrixXd> kl(k);
  if (kl.info() != Eigen::Success) {
    throw Error(ErrorCode::IndefiniteGram, "position block of the energy Gram is not definite");
  }
  Eigen::LLT<MatrixXd> ml(mb);
  if (ml.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "mass matrix is not definite");
  }
  lp_ = kl.matrixL();
  lm_ = ml.matrixL();
  b_ = lm_.triangularView<Eigen::Lower>().solve(lp_);

  a_hat_ = MatrixXd::Zero(2 * n2_, 2 * n2_);
  a_hat_.topRightCorner(n2_, n2_) = b_.transpose();
  a_hat_.bottomLeftCorner(n2_, n2_) = -b_;
  if (!gen.conservative()) {
    const MatrixXd c = MatrixXd(gen.velocity_block());
    const MatrixXd x = lm_.triangularView<Eigen::Lower>().solve(c);
    const MatrixXd c_hat =
        lm_.triangularView<Eigen::Lower>().solve(x.transpose()).transpose();
    a_hat_.bottomRightCorner(n2_, n2_) = -c_hat;
  }
}

VectorXcd EnergyFrame::to_state(const VectorXcd& x_hat) const {
  auto solve = [](const MatrixXd& l, const VectorXcd& y) {
    const auto u = l.transpose().triangularView<Eigen::Upper>();
    VectorXcd x(y.size());
    x.real() = u.solve(VectorXd(y.real()));
    x.imag() = u.solve(VectorXd(y.imag()));
    return x;
  };
  VectorXcd x(2 * n2_);
  x.head(n2_) = solve(lp_, x_hat.head(n2_));
  x.tail(n2_) = solve(lm_, x_hat.tail(n2_));
  return x;
}

VectorXcd EnergyFrame::from_state(const VectorXcd& x) const {
  VectorXcd x_hat(2 * n2_);
  x_hat.head(n2_) = lp_.transpose().cast<Complex>() * x.head(n2_);
  x_hat.tail(n2_) = lm_.transpose().cast<Complex>() * x.tail(n2_);
  return x_hat;
}

SpectrumResult eigenvalues(const GeneratorOperator& gen, bool with_vectors) {
  if (gen.chain_size() > kDenseChainLimit) {
    throw Error(ErrorCode::SizeExceeded, "chain size " + std::to_string(gen.chain_size()) +
                                             " exceeds the dense limit " +
                                             std::to_string(kDenseChainLimit));
  }
  const EnergyFrame frame(gen);
  SpectrumResult r;
  r.mesh_h = gen.mesh_h();
  const Index n2 = 2 * gen.chain_size();

  if (gen.conservative()) {
    // Skew frame matrix [[0, B^T], [-B, 0]]: with B = U S V^T the eigenpairs
    // are +-i s_k with vectors (v_k, +-i u_k) / sqrt(2).
    if (with_vectors) {
      Eigen::JacobiSVD<MatrixXd> svd(frame.coupling(), Eigen::ComputeFullU | Eigen::ComputeFullV);
      r.vectors.resize(2 * n2, 2 * n2);
      const auto& s = svd.singularValues();
      for (Index k = 0; k < n2; ++k) {
        for (int sign : {1, -1}) {
          VectorXcd xh(2 * n2);
          xh.head(n2) = svd.matrixV().col(k).cast<Complex>();
          xh.tail(n2) = Complex(0.0, sign) * svd.matrixU().col(k).cast<Complex>();
          xh /= std::sqrt(2.0);
          r.eigenvalues.emplace_back(0.0, sign * s[k]);
          r.vectors.col(static_cast<Index>(r.eigenvalues.size()) - 1) = frame.to_state(xh);
        }
      }
    } else {
      Eigen::BDCSVD<MatrixXd> svd(frame.coupling());
      for (Index k = 0; k < n2; ++k) {
        const double s = svd.singularValues()[k];
        r.eigenvalues.emplace_back(0.0, s);
        r.eigenvalues.emplace_back(0.0, -s);
      }
    }
  } else {
    Eigen::EigenSolver<MatrixXd> es(frame.matrix(), with_vectors);
    if (es.info() != Eigen::Success) {
      throw Error(ErrorCode::ConvergenceFailure, "dense eigensolver did not converge");
    }
    const VectorXcd ev = es.eigenvalues();
    r.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    if (with_vectors) {
      const MatrixXcd vh = es.eigenvectors();
      r.vectors.resize(vh.rows(), vh.cols());
      for (Index j = 0; j < vh.cols(); ++j) r.vectors.col(j) = frame.to_state(vh.col(j));
    }
  }
  finish(r);
  return r;
}

SpectrumResult eigenvalues_near(const GeneratorOperator& gen, double frequency, int k,
                                bool with_vectors) {
  using SparseC = Eigen::SparseMatrix<Complex>;
  const Index n = gen.chain_size();
  const Index dim = 4 * n;
  if (k <= 0 || k > dim) throw Error(ErrorCode::InvalidArgument, "k out of range");
  const Complex sigma(0.0, frequency);

  // (J - sigma E) y = E x with E = diag(I, Mb), J = [[0, I], [-K, -C]].
  std::vector<Eigen::Triplet<Complex>> t;
  for (Index i = 0; i < 2 * n; ++i) {
    t.emplace_back(i, i, -sigma);
    t.emplace_back(i, 2 * n + i, 1.0);
  }
  auto add = [&t](const SparseMatrix& m, Index r0, Index c0, Complex scale) {
    for (Index c = 0; c < m.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
        t.emplace_back(r0 + it.row(), c0 + it.col(), scale * it.value());
      }
    }
  };
  add(gen.stiffness_block(), 2 * n, 0, -1.0);
  add(gen.velocity_block(), 2 * n, 2 * n, -1.0);
  add(gen.mass_block(), 2 * n, 2 * n, -sigma);
  SparseC pencil(dim, dim);
  pencil.setFromTriplets(t.begin(), t.end());
  pencil.makeCompressed();
  Eigen::SparseLU<SparseC> lu;
  lu.compute(pencil);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularSystem, "shift coincides with an eigenvalue");
  }
  const SparseC e_mass = gen.mass_block().cast<Complex>();
  auto op = [&](const VectorXcd& x) {
    VectorXcd ex = x;
    ex.tail(2 * n) = e_mass * x.tail(2 * n);
    return VectorXcd(lu.solve(ex));
  };

  const Index m = std::min<Index>(dim, std::max<Index>(3 * k + 10, 30));
  const double tol = 1e-11;
  const int max_restarts = 60;
  VectorXcd start = fixed_start(dim, 7u);
  for (int restart = 0; restart <= max_restarts; ++restart) {
    MatrixXcd v = MatrixXcd::Zero(dim, m + 1);
    MatrixXcd h = MatrixXcd::Zero(m + 1, m);
    v.col(0) = start.normalized();
    Index steps = m;
    for (Index j = 0; j < m; ++j) {
      VectorXcd w = op(v.col(j));
      for (int pass = 0; pass < 2; ++pass) {  // classical Gram-Schmidt, twice
        const VectorXcd coeff = v.leftCols(j + 1).adjoint() * w;
        w -= v.leftCols(j + 1) * coeff;
        h.col(j).head(j + 1) += coeff;
      }
      h(j + 1, j) = w.norm();
      if (std::abs(h(j + 1, j)) < 1e-14) {
        steps = j + 1;
        break;
      }
      v.col(j + 1) = w / h(j + 1, j);
    }
    const MatrixXcd hm = h.topLeftCorner(steps, steps);
    Eigen::ComplexEigenSolver<MatrixXcd> ces(hm, true);
    const VectorXcd theta = ces.eigenvalues();
    std::vector<Index> order(static_cast<std::size_t>(steps));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Index a, Index b) { return std::abs(theta[a]) > std::abs(theta[b]); });
    const Index want = std::min<Index>(k, steps);
    bool converged = true;
    const Complex beta = steps < m || steps == dim ? Complex(0.0) : h(steps, steps - 1);
    for (Index i = 0; i < want; ++i) {
      const Index idx = order[static_cast<std::size_t>(i)];
      const double res = std::abs(beta) * std::abs(ces.eigenvectors()(steps - 1, idx));
      if (res > tol * std::abs(theta[idx])) converged = false;
    }
    if (converged) {
      SpectrumResult r;
      r.mesh_h = gen.mesh_h();
      if (with_vectors) r.vectors.resize(dim, want);
      for (Index i = 0; i < want; ++i) {
        const Index idx = order[static_cast<std::size_t>(i)];
        r.eigenvalues.push_back(sigma + 1.0 / theta[idx]);
        if (with_vectors) {
          r.vectors.col(i) = (v.leftCols(steps) * ces.eigenvectors().col(idx)).normalized();
        }
      }
      finish(r);
      return r;
    }
    // Explicit restart on the sum of the wanted Ritz vectors.
    start = VectorXcd::Zero(dim);
    for (Index i = 0; i < want; ++i) {
      const Index idx = order[static_cast<std::size_t>(i)];
      start += (v.leftCols(steps) * ces.eigenvectors().col(idx)).normalized();
    }
    if (start.norm() == 0.0) start = fixed_start(dim, static_cast<unsigned>(restart + 11));
  }
  throw Error(ErrorCode::ConvergenceFailure, "shift-invert Arnoldi did not converge");
}

double eigen_residual(const GeneratorOperator& gen, Complex lambda, const VectorXcd& x) {
  const VectorXcd r = gen.apply(x) - lambda * x;
  return gen.norm(r) / gen.norm(x);
}

ResolventEvaluator::ResolventEvaluator(const GeneratorOperator& gen) : mesh_h_(gen.mesh_h()) {
  const EnergyFrame frame(gen);
  Eigen::ComplexSchur<MatrixXcd> schur(frame.matrix().cast<Complex>(), false);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorCode::ConvergenceFailure, "complex Schur reduction failed");
  }
  t_ = schur.matrixT();
  eigenvalues_.resize(static_cast<std::size_t>(t_.rows()));
  for (Index i = 0; i < t_.rows(); ++i) eigenvalues_[static_cast<std::size_t>(i)] = t_(i, i);
}

ResolventValue ResolventEvaluator::operator()(double lambda) const {
  const Index n = t_.rows();
  const Complex shift(0.0, lambda);
  const double floor = 1e-14 * (1.0 + std::abs(lambda));

  ResolventValue out;
  for (const Complex& z : eigenvalues_) {
    if (std::abs(z.real()) <= 1e-8 * (1.0 + std::abs(z)) &&
        std::abs(lambda - z.imag()) < 1e-8 * (1.0 + std::abs(lambda))) {
      out.near_singular = true;
    }
  }

  VectorXcd diag(n);
  for (Index i = 0; i < n; ++i) {
    Complex d = shift - t_(i, i);
    if (std::abs(d) < floor) d = floor;
    diag[i] = d;
  }
  // y = (i lambda - T)^{-*} x: forward substitution on the conjugate transpose.
  auto solve_adjoint = [&](VectorXcd& y) {
    for (Index i = 0; i < n; ++i) {
      Complex acc = y[i];
      if (i > 0) acc += t_.col(i).head(i).dot(y.head(i));  // conj(T_ji) y_j
      y[i] = acc / std::conj(diag[i]);
    }
  };
  // z = (i lambda - T)^{-1} y: column-oriented back substitution.
  auto solve_upper = [&](VectorXcd& z) {
    for (Index j = n - 1; j >= 0; --j) {
      z[j] /= diag[j];
      if (j > 0) z.head(j) += t_.col(j).head(j) * z[j];
    }
  };

  // Lanczos on W = R R^*, R = (i lambda - T)^{-1}; ||R||^2 = lambda_max(W).
  const Index max_steps = std::min<Index>(n, 80);
  std::vector<VectorXcd> basis;
  std::vector<double> alpha, beta;
  VectorXcd q = fixed_start(n, 1u);
  double previous = 0.0;
  double top = 0.0;
  for (Index j = 0; j < max_steps; ++j) {
    basis.push_back(q);
    VectorXcd w = q;
    solve_adjoint(w);
    solve_upper(w);
    const double a = q.dot(w).real();
    alpha.push_back(a);
    for (const auto& b : basis) w -= b * b.dot(w);
    for (const auto& b : basis) w -= b * b.dot(w);
    const double bnorm = w.norm();

    const auto m = static_cast<Index>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(tri, Eigen::EigenvaluesOnly);
    top = tes.eigenvalues().maxCoeff();
    if (bnorm <= 1e-14 * top) break;
    if (j >= 2 && std::abs(top - previous) <= 1e-13 * top) break;
    previous = top;
    beta.push_back(bnorm);
    q = w / bnorm;
  }
  out.norm = std::sqrt(top);
  return out;
}

ResolventValue resolvent_norm(const GeneratorOperator& gen, double lambda) {
  return ResolventEvaluator(gen)(lambda);
}

double resolvent_norm_dense(const GeneratorOperator& gen, double lambda) {
  const EnergyFrame frame(gen);
  MatrixXcd m = -frame.matrix().cast<Complex>();
  m.diagonal().array() += Complex(0.0, lambda);
  Eigen::JacobiSVD<MatrixXcd> svd(m);
  const double smin = svd.singularValues().minCoeff();
  return smin > 0.0 ? 1.0 / smin : std::numeric_limits<double>::infinity();
}

double frequency_cutoff(double mesh_h) { return 0.2 * std::numbers::pi / mesh_h; }

std::vector<double> log_grid(double lambda_min, double lambda_max, int points) {
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min) || points < 2) {
    throw Error(ErrorCode::InvalidArgument, "log grid needs 0 < min < max and >= 2 points");
  }
  std::vector<double> g(static_cast<std::size_t>(points));
  const double a = std::log(lambda_min);
  const double b = std::log(lambda_max);
  for (int i = 0; i < points; ++i) {
    g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
  }
  g.front() = lambda_min;
  g.back() = lambda_max;
  return g;
}

std::size_t ResolventSamples::envelope_points() const {
  return static_cast<std::size_t>(std::count(is_envelope.begin(), is_envelope.end(), true));
}

bool ResolventSamples::any_near_singular() const {
  return std::find(near_singular.begin(), near_singular.end(), true) != near_singular.end();
}

namespace {

// Maximizes the norm on [lo, hi] by golden-section search.
std::pair<double, ResolventValue> refine_peak(const ResolventEvaluator& eval, double lo,
                                              double hi, double x0, ResolventValue f0) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  ResolventValue fc = eval(c);
  ResolventValue fd = eval(d);
  double best_x = x0;
  ResolventValue best = f0;
  for (int it = 0; it < 60 && (b - a) > 1e-9 * b; ++it) {
    if (fc.norm > fd.norm) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = eval(d);
    }
  }
  for (auto [x, f] : {std::pair{c, fc}, std::pair{d, fd}}) {
    if (f.norm > best.norm) {
      best = f;
      best_x = x;
    }
  }
  return {best_x, best};
}

}  // namespace

ResolventSamples resolvent_sweep(const ResolventEvaluator& eval, std::span<const double> grid,
                                 const SweepOptions& opts) {
  const double cutoff = frequency_cutoff(eval.mesh_h());
  ResolventSamples s;
  std::vector<double> lambdas;
  for (double l : grid) {
    if (l > 0.0 && l <= cutoff) {
      lambdas.push_back(l);
    } else {
      ++s.dropped_points;
    }
  }
  if (lambdas.size() < 2) {
    throw Error(ErrorCode::BandTooNarrow,
                "no usable grid points below the cutoff " + std::to_string(cutoff));
  }
  std::sort(lambdas.begin(), lambdas.end());
  s.band_min = lambdas.front();
  s.band_max = lambdas.back();
  if (opts.include_eigenfrequencies) {
    for (const Complex& z : eval.eigenvalues()) {
      if (z.imag() > s.band_min && z.imag() < s.band_max) lambdas.push_back(z.imag());
    }
    std::sort(lambdas.begin(), lambdas.end());
    lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  }

  std::vector<ResolventValue> values;
  values.reserve(lambdas.size());
  for (double l : lambdas) values.push_back(eval(l));

  // Interior local maxima of the sampled curve are the resonance peaks.
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < lambdas.size(); ++i) {
    if (values[i].norm >= values[i - 1].norm && values[i].norm >= values[i + 1].norm) {
      peaks.push_back(i);
    }
  }
  if (opts.refine_peaks) {
    for (std::size_t i : peaks) {
      auto [x, f] = refine_peak(eval, lambdas[i - 1], lambdas[i + 1], lambdas[i], values[i]);
      lambdas[i] = x;
      values[i] = f;
    }
  }

  s.lambdas = lambdas;
  s.norms.reserve(values.size());
  for (const auto& v : values) {
    s.norms.push_back(v.norm);
    s.near_singular.push_back(v.near_singular);
  }
  s.is_envelope.assign(lambdas.size(), false);
  s.envelope.assign(lambdas.size(), std::numeric_limits<double>::quiet_NaN());
  const double window = opts.envelope_window;
  for (std::size_t i : peaks) {
    s.is_envelope[i] = true;
    double sup = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      if (lambdas[j] >= lambdas[i] / window) sup = std::max(sup, s.norms[j]);
    }
    s.envelope[i] = sup;
  }

  const std::size_t count = peaks.size();
  if (count < static_cast<std::size_t>(opts.min_envelope_points)) {
    throw Error(ErrorCode::BandTooNarrow, "only " + std::to_string(count) +
                                              " envelope points in [" +
                                              std::to_string(s.band_min) + ", " +
                                              std::to_string(s.band_max) + "]");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i : peaks) {
    const double x = std::log(lambdas[i]);
    const double y = std::log(s.envelope[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double nn = static_cast<double>(count);
  const double vxx = sxx - sx * sx / nn;
  const double vxy = sxy - sx * sy / nn;
  const double vyy = syy - sy * sy / nn;
  s.fitted_exponent = vxy / vxx;
  s.fit_intercept = (sy - s.fitted_exponent * sx) / nn;
  s.r_squared = vyy > 0.0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
  return s;
}

}  // namespace twowave
