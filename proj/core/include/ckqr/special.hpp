#pragma once

namespace ckqr {

//! Phi^{-1}(p), p in (0, 1).
double normal_quantile(double p);

//! Quantile of Beta(a, b) by inversion of the regularized incomplete beta.
double beta_quantile(double a, double b, double p);
double beta_pdf(double a, double b, double x);
//! d/dx of the Beta(a, b) density.
double beta_pdf_derivative(double a, double b, double x);

double chi_squared_quantile(double dof, double p);
double chi_squared_pdf(double dof, double x);

double student_t_quantile(double dof, double p);

} // namespace ckqr
