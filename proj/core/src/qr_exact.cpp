#include "ckqr/qr_exact.hpp"

#include "ckqr/newton.hpp"
#include "ckqr/parallel.hpp"
#include "ckqr/qr_smooth.hpp"
#include "ckqr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace ckqr {

double
check_objective(const Dataset& data, const Vector& b, double tau)
{
  const Vector r = data.residuals(b);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    acc += check_loss(r(i), tau);
  }
  return acc / static_cast<double>(r.size());
}

double
weighted_check_objective(const Dataset& data, const Vector& b, double tau, const Vector& weights)
{
  const Vector r = data.residuals(b);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    acc += weights(i) * check_loss(r(i), tau);
  }
  return acc / static_cast<double>(r.size());
}

namespace {

using Index = Eigen::Index;

double
zero_tolerance(const Dataset& data)
{
  return 1e-11 * (1.0 + data.y().cwiseAbs().maxCoeff());
}

// Greedy pick of d linearly independent rows, smallest |r| first.
std::optional<std::vector<Index>>
pick_basis(const Dataset& data, const Vector& r)
{
  const Index n = data.n();
  const Index d = data.d();
  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{ 0 });
  auto by_abs = [&r](Index a, Index b) { return std::abs(r(a)) < std::abs(r(b)); };
  const auto head = std::min<Index>(n, 4 * d + 8);
  std::partial_sort(order.begin(), order.begin() + head, order.end(), by_abs);

  std::vector<Index> basis;
  Matrix q(d, d);
  Index rank = 0;
  for (Index pos = 0; pos < n && rank < d; ++pos) {
    if (pos == head) {
      std::sort(order.begin() + head, order.end(), by_abs);
    }
    const Index i = order[static_cast<size_t>(pos)];
    Vector v = data.x().row(i).transpose();
    const double norm0 = v.norm();
    for (Index k = 0; k < rank; ++k) {
      v -= q.col(k).dot(v) * q.col(k);
    }
    const double nv = v.norm();
    if (nv > 1e-8 * norm0 && nv > 0.0) {
      q.col(rank) = v / nv;
      ++rank;
      basis.push_back(i);
    }
  }
  if (rank < d) {
    return std::nullopt;
  }
  return basis;
}

Matrix
basis_rows(const Dataset& data, const std::vector<Index>& basis)
{
  Matrix xb(data.d(), data.d());
  for (size_t k = 0; k < basis.size(); ++k) {
    xb.row(static_cast<Index>(k)) = data.x().row(basis[k]);
  }
  return xb;
}

Vector
solve_basis(const Dataset& data, const std::vector<Index>& basis)
{
  Vector yb(data.d());
  for (size_t k = 0; k < basis.size(); ++k) {
    yb(static_cast<Index>(k)) = data.y()(basis[k]);
  }
  return basis_rows(data, basis).partialPivLu().solve(yb);
}

struct EdgeScan
{
  double worst = 0.0;    // most negative normalized directional derivative
  double raw_slope = 0.0; // unnormalized slope of the worst edge
  Index edge = -1;
  double sign = 1.0;
  bool optimal = true;
};

// Directional derivatives of sum w_i rho(r_i - t a_i) at t = 0+ along +/- the
// columns of X_B^{-1}.
EdgeScan
scan_edges(const Dataset& data,
           const Vector& r,
           double tau,
           const Matrix& binv,
           const Vector* w)
{
  const Index n = data.n();
  const double ztol = zero_tolerance(data);
  const Matrix a = data.x() * binv;
  EdgeScan scan;
  for (Index j = 0; j < binv.cols(); ++j) {
    double plus = 0.0;
    double minus = 0.0;
    double mass = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double wi = w ? (*w)(i) : 1.0;
      const double aij = a(i, j);
      mass += wi * std::abs(aij);
      if (std::abs(r(i)) > ztol) {
        const double psi = tau - (r(i) < 0.0 ? 1.0 : 0.0);
        plus += -wi * aij * psi;
        minus += wi * aij * psi;
      } else {
        plus += wi * check_loss(-aij, tau);
        minus += wi * check_loss(aij, tau);
      }
    }
    const double nd = static_cast<double>(n);
    const double tol = -1e-9 * std::max(1.0, mass / nd);
    for (double sgn : { 1.0, -1.0 }) {
      const double raw = (sgn > 0.0) ? plus : minus;
      const double dd = raw / nd;
      if (dd < tol) {
        scan.optimal = false;
      }
      const double normalized = dd / std::max(1.0, mass / nd);
      if (normalized < scan.worst) {
        scan.worst = normalized;
        scan.raw_slope = raw;
        scan.edge = j;
        scan.sign = sgn;
      }
    }
  }
  return scan;
}

FitResult
fit_exact_impl(const Dataset& data, double tau, const Vector* w, const ExactOptions& opt)
{
  if (!(tau > 0.0 && tau < 1.0)) {
    fail(ErrorKind::invalid_argument, "tau must lie in (0, 1)");
  }
  const Index n = data.n();

  auto objective = [&](const Vector& b) {
    return w ? weighted_check_objective(data, b, tau, *w) : check_objective(data, b, tau);
  };

  int iterations = 0;
  std::vector<Index> basis;
  Vector b = ols_quantile_start(data, tau);

  auto try_vertex = [&](const Vector& from) -> bool {
    auto picked = pick_basis(data, data.residuals(from));
    if (!picked) {
      fail(ErrorKind::rank_deficient, "no nonsingular basis in the design");
    }
    basis = std::move(*picked);
    b = solve_basis(data, basis);
    const Matrix binv = basis_rows(data, basis).inverse();
    return scan_edges(data, data.residuals(b), tau, binv, w).optimal;
  };

  std::vector<double> r0(static_cast<size_t>(n));
  {
    const Vector r = data.residuals(b);
    std::copy(r.data(), r.data() + n, r0.begin());
  }
  const double mean = std::accumulate(r0.begin(), r0.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : r0) {
    ss += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double iqr = sample_quantile(r0, 0.75) - sample_quantile(r0, 0.25);
  double scale = std::min(sd, iqr / 1.349);
  if (!(scale > 0.0)) {
    scale = std::max(sd, iqr / 1.349);
  }

  bool certified = false;
  if (!(scale > 0.0)) {
    // OLS interpolates every observation.
    certified = try_vertex(b);
  } else {
    const Kernel gauss = Kernel::gaussian(2);
    const double h_floor = 1e-6 * scale;
    Vector smooth = b;
    for (double h = 1.06 * scale * std::pow(static_cast<double>(n), -0.2); h >= h_floor;
         h *= 0.5) {
      ConvolvedCheckLoss loss(gauss, tau, h);
      ResidualObjective<ConvolvedCheckLoss> obj{ data, loss, w };
      NewtonOptions nopt;
      nopt.max_iter = opt.newton_iter_per_level;
      auto step = newton_minimize(obj, smooth, nopt);
      iterations += step.iterations;
      smooth = std::move(step.beta);
      if (try_vertex(smooth)) {
        certified = true;
        break;
      }
    }
  }

  // Edge descent over basic solutions.
  int pivots = 0;
  while (!certified) {
    if (pivots >= opt.max_pivots) {
      fail(ErrorKind::no_convergence, "exact QR exceeded the pivot cap");
    }
    const Matrix binv = basis_rows(data, basis).inverse();
    const Vector r = data.residuals(b);
    const EdgeScan scan = scan_edges(data, r, tau, binv, w);
    if (scan.optimal || scan.edge < 0) {
      certified = scan.optimal;
      if (!certified) {
        fail(ErrorKind::no_convergence, "exact QR stalled at a degenerate vertex");
      }
      break;
    }
    const Vector delta = scan.sign * binv.col(scan.edge);
    const Vector a = data.x() * delta;
    const double ztol = zero_tolerance(data);

    struct Break
    {
      double t;
      double jump;
      Index i;
    };
    std::vector<Break> brk;
    for (Index i = 0; i < n; ++i) {
      if (std::abs(r(i)) <= ztol || a(i) == 0.0) {
        continue;
      }
      const double t = r(i) / a(i);
      if (t > 0.0) {
        brk.push_back({ t, (w ? (*w)(i) : 1.0) * std::abs(a(i)), i });
      }
    }
    std::sort(brk.begin(), brk.end(), [](const Break& x, const Break& y) { return x.t < y.t; });
    double slope = scan.raw_slope;
    Index entering = -1;
    for (const auto& bk : brk) {
      slope += bk.jump;
      if (slope >= 0.0) {
        entering = bk.i;
        break;
      }
    }
    if (entering < 0) {
      fail(ErrorKind::no_convergence, "check objective unbounded along an edge");
    }
    basis[static_cast<size_t>(scan.edge)] = entering;
    b = solve_basis(data, basis);
    ++pivots;
  }

  FitResult out;
  out.beta = b;
  out.tau = tau;
  out.h = 0.0;
  out.objective = objective(b);
  out.grad_norm = 0.0;
  out.iterations = iterations + pivots;
  out.converged = true;
  return out;
}

} // namespace

ExactCertificate
certify_exact(const Dataset& data,
              const Vector& b,
              double tau,
              const std::vector<Eigen::Index>& basis,
              const Vector* weights)
{
  if (static_cast<Index>(basis.size()) != data.d()) {
    fail(ErrorKind::invalid_argument, "basis must hold d observations");
  }
  const Matrix xb = basis_rows(data, basis);
  Eigen::FullPivLU<Matrix> lu(xb);
  if (!lu.isInvertible()) {
    fail(ErrorKind::rank_deficient, "basis rows are linearly dependent");
  }
  const auto scan = scan_edges(data, data.residuals(b), tau, lu.inverse(), weights);
  ExactCertificate cert;
  cert.optimal = scan.optimal;
  cert.min_directional_derivative = std::min(0.0, scan.worst);
  cert.basis = basis;
  return cert;
}

FitResult
fit_exact(const Dataset& data, double tau, const ExactOptions& options)
{
  return fit_exact_impl(data, tau, nullptr, options);
}

FitResult
fit_exact_weighted(const Dataset& data, double tau, const Vector& weights, const ExactOptions& options)
{
  if (weights.size() != data.n()) {
    fail(ErrorKind::invalid_argument, "weights length differs from n");
  }
  if (!(weights.array() > 0.0).all()) {
    fail(ErrorKind::invalid_argument, "exact QR weights must be positive");
  }
  return fit_exact_impl(data, tau, &weights, options);
}

Vector
pairs_bootstrap_se(const Dataset& data, double tau, int reps, std::uint64_t seed, unsigned threads)
{
  if (reps < 100) {
    fail(ErrorKind::invalid_argument, "pairs bootstrap needs at least 100 replicates");
  }
  const Index n = data.n();
  const Index d = data.d();
  std::vector<Vector> draws(static_cast<size_t>(reps));
  parallel_for(static_cast<size_t>(reps), threads, [&](size_t r) {
    Rng rng(seed, r);
    for (int attempt = 0;; ++attempt) {
      std::vector<Index> rows(static_cast<size_t>(n));
      for (auto& row : rows) {
        row = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      }
      try {
        const Dataset resample = data.subset(rows);
        draws[r] = fit_exact(resample, tau).beta;
        return;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::rank_deficient || attempt >= 10) {
          throw;
        }
      }
    }
  });

  Vector mean = Vector::Zero(d);
  for (const auto& b : draws) {
    mean += b;
  }
  mean /= static_cast<double>(reps);
  Vector var = Vector::Zero(d);
  for (const auto& b : draws) {
    var += (b - mean).array().square().matrix();
  }
  var /= static_cast<double>(reps - 1);
  return var.array().sqrt();
}

} // namespace ckqr
