#pragma once

#include "ckqr/dataset.hpp"

#include <cmath>
#include <optional>

namespace ckqr {

//! Value and first two derivatives of a per-observation loss with respect to
//! the residual e = y - x'b.
struct LossDerivs
{
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

//! Objective of the form (1/n) sum_i w_i L(e_i(b)). Its gradient in b is
//! -(1/n) sum w_i x_i L'(e_i) and its Hessian (1/n) sum w_i x_i x_i' L''(e_i).
//! A Loss provides `double value(double e) const` and
//! `LossDerivs derivs(double e) const`.
template<class Loss>
struct ResidualObjective
{
  const Dataset& data;
  const Loss& loss;
  const Vector* weights = nullptr;

  double weight(Eigen::Index i) const { return weights ? (*weights)(i) : 1.0; }

  double value(const Vector& b) const
  {
    const Vector e = data.residuals(b);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      acc += weight(i) * loss.value(e(i));
    }
    return acc / static_cast<double>(e.size());
  }

  Vector gradient(const Vector& b) const
  {
    const Vector e = data.residuals(b);
    Vector g(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      g(i) = weight(i) * loss.derivs(e(i)).d1;
    }
    return -(data.x().transpose() * g) / static_cast<double>(e.size());
  }

  Matrix hessian(const Vector& b) const
  {
    const Vector e = data.residuals(b);
    Vector c(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      c(i) = weight(i) * loss.derivs(e(i)).d2;
    }
    return weighted_gram(c);
  }

  //! Value, gradient and Hessian in one pass over the residuals.
  void evaluate(const Vector& b, double& f, Vector& g, Matrix& h) const
  {
    const Vector e = data.residuals(b);
    Vector c1(e.size());
    Vector c2(e.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      const double w = weight(i);
      const LossDerivs r = loss.derivs(e(i));
      acc += w * r.value;
      c1(i) = w * r.d1;
      c2(i) = w * r.d2;
    }
    const double n = static_cast<double>(e.size());
    f = acc / n;
    g = -(data.x().transpose() * c1) / n;
    h = weighted_gram(c2);
  }

  Matrix weighted_gram(const Vector& c) const
  {
    const auto& x = data.x();
    Matrix h = x.transpose() * c.asDiagonal() * x;
    h /= static_cast<double>(x.rows());
    return 0.5 * (h + h.transpose());
  }
};

struct NewtonOptions
{
  int max_iter = 200;
  //! Converged when ||grad||_inf <= grad_tol * max(1, mean ||X_i||) * weight scale.
  double grad_tol = 1e-10;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
};

struct NewtonOutcome
{
  Vector beta;
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  Matrix hessian;
};

//! Solves (H + gamma I) p = -g where gamma lifts the smallest eigenvalue of
//! the symmetric H to at least 1e-8 * |trace(H)| / d.
Vector regularized_newton_direction(const Matrix& h, const Vector& g);

//! Smallest eigenvalue and trace floor check shared by Hessian consumers:
//! true when min eig(h) > rel_floor * trace(h) / d.
bool passes_eigen_floor(const Matrix& h, double rel_floor = 1e-10);

//! OLS coefficients with the intercept shifted by the empirical tau-quantile
//! of the OLS residuals.
Vector ols_quantile_start(const Dataset& data, double tau);

//! Type-7 (linear interpolation) sample quantile.
double sample_quantile(std::vector<double> values, double p);

template<class Loss>
NewtonOutcome
newton_minimize(const ResidualObjective<Loss>& obj, Vector b, const NewtonOptions& opt)
{
  double wscale = 1.0;
  if (obj.weights != nullptr && obj.weights->size() > 0) {
    wscale = std::max(1.0, obj.weights->cwiseAbs().mean());
  }
  const double tol = opt.grad_tol * std::max(1.0, obj.data.mean_row_norm()) * wscale;

  NewtonOutcome out;
  double f = 0.0;
  Vector g;
  Matrix h;
  obj.evaluate(b, f, g, h);

  int it = 0;
  for (; it < opt.max_iter; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= tol) {
      out.converged = true;
      break;
    }
    const Vector p = regularized_newton_direction(h, g);
    const double slope = g.dot(p);
    if (!(slope < 0.0)) {
      break;
    }

    double alpha = 1.0;
    bool accepted = false;
    Vector trial;
    double f_trial = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      trial = b + alpha * p;
      f_trial = obj.value(trial);
      if (f_trial <= f + opt.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      // Objective differences below rounding: fall back to gradient decrease.
      if (std::abs(alpha * slope) <= 1e-12 * (1.0 + std::abs(f)) &&
          f_trial <= f + 1e-14 * (1.0 + std::abs(f))) {
        const Vector g_trial = obj.gradient(trial);
        if (g_trial.lpNorm<Eigen::Infinity>() < g.lpNorm<Eigen::Infinity>()) {
          accepted = true;
          break;
        }
      }
      alpha *= opt.backtrack;
    }
    if (!accepted) {
      break;
    }
    b = std::move(trial);
    obj.evaluate(b, f, g, h);
  }
  if (!out.converged && g.lpNorm<Eigen::Infinity>() <= tol) {
    out.converged = true;
  }
  out.beta = std::move(b);
  out.objective = f;
  out.grad_norm = g.lpNorm<Eigen::Infinity>();
  out.iterations = it;
  out.hessian = std::move(h);
  return out;
}

} // namespace ckqr
