#pragma once

#include "ckqr/common.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ckqr {

//! A sample (Y_i, X_i), i = 1..n, with X stored row-per-observation.
//! Construction validates n > d >= 1, finiteness and full column rank.
class Dataset
{
public:
  Dataset(Vector y, Matrix x, std::vector<std::string> names = {});

  Eigen::Index n() const noexcept { return y_.size(); }
  Eigen::Index d() const noexcept { return x_.cols(); }
  const Vector& y() const noexcept { return y_; }
  const Matrix& x() const noexcept { return x_; }
  //! Column names of x (intercept first when present).
  const std::vector<std::string>& names() const noexcept { return names_; }
  //! Column mean of the design, X-bar.
  const Vector& x_mean() const noexcept { return x_mean_; }
  //! (1/n) sum ||X_i||, the scale used by convergence tolerances.
  double mean_row_norm() const noexcept { return mean_row_norm_; }

  Vector residuals(const Vector& b) const { return y_ - x_ * b; }

  //! Rows picked by index, in the given order. Throws rank_deficient when the
  //! subset's design is degenerate.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;

private:
  Vector y_;
  Matrix x_;
  std::vector<std::string> names_;
  Vector x_mean_;
  double mean_row_norm_ = 1.0;
};

//! True when x has full column rank at tolerance 1e-10 * largest singular value.
bool has_full_column_rank(const Matrix& x);

//! Reads a CSV with a header row: column "y" first, then covariates. An
//! intercept column of ones is prepended unless a column named "intercept"
//! already exists.
Dataset read_dataset_csv(std::istream& in);
Dataset read_dataset_csv(const std::string& path);

//! Writes y then the design columns (intercept included, named "intercept")
//! with 17 significant digits so that reading the file back reproduces the
//! same data bit for bit.
void write_dataset_csv(std::ostream& out, const Dataset& data);

} // namespace ckqr
