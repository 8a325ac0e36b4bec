#include "ckqr/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ckqr {

std::string_view
to_string(ErrorKind kind)
{
  switch (kind) {
    case ErrorKind::invalid_argument:
      return "InvalidArgument";
    case ErrorKind::rank_deficient:
      return "RankDeficient";
    case ErrorKind::no_convergence:
      return "NoConvergence";
    case ErrorKind::singular_hessian:
      return "SingularHessian";
    case ErrorKind::degenerate_residuals:
      return "DegenerateResiduals";
    case ErrorKind::zero_bias:
      return "ZeroBias";
    case ErrorKind::unsupported_design:
      return "UnsupportedDesign";
    case ErrorKind::all_weights_clamped:
      return "AllWeightsClamped";
    case ErrorKind::too_many_failures:
      return "TooManyFailures";
    case ErrorKind::io:
      return "IoError";
  }
  return "Unknown";
}

bool
has_full_column_rank(const Matrix& x)
{
  if (x.rows() < x.cols() || x.cols() == 0) {
    return false;
  }
  Eigen::JacobiSVD<Matrix> svd(x);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0) {
    return false;
  }
  return sv(sv.size() - 1) > 1e-10 * sv(0);
}

Dataset::Dataset(Vector y, Matrix x, std::vector<std::string> names)
  : y_(std::move(y))
  , x_(std::move(x))
  , names_(std::move(names))
{
  if (y_.size() != x_.rows()) {
    fail(ErrorKind::invalid_argument, "y and x have different numbers of rows");
  }
  if (x_.cols() < 1 || y_.size() <= x_.cols()) {
    fail(ErrorKind::invalid_argument,
         "dataset needs n > d >= 1 (n=" + std::to_string(y_.size()) +
           ", d=" + std::to_string(x_.cols()) + ")");
  }
  if (!y_.allFinite() || !x_.allFinite()) {
    fail(ErrorKind::invalid_argument, "dataset contains non-finite values");
  }
  if (!has_full_column_rank(x_)) {
    fail(ErrorKind::rank_deficient, "design matrix does not have full column rank");
  }
  if (names_.empty()) {
    for (Eigen::Index j = 0; j < x_.cols(); ++j) {
      names_.push_back("x" + std::to_string(j));
    }
  } else if (static_cast<Eigen::Index>(names_.size()) != x_.cols()) {
    fail(ErrorKind::invalid_argument, "column names do not match design width");
  }
  x_mean_ = x_.colwise().mean().transpose();
  mean_row_norm_ = x_.rowwise().norm().mean();
}

Dataset
Dataset::subset(const std::vector<Eigen::Index>& rows) const
{
  Vector y(static_cast<Eigen::Index>(rows.size()));
  Matrix x(static_cast<Eigen::Index>(rows.size()), d());
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto r = rows[i];
    y(static_cast<Eigen::Index>(i)) = y_(r);
    x.row(static_cast<Eigen::Index>(i)) = x_.row(r);
  }
  return Dataset(std::move(y), std::move(x), names_);
}

namespace {

std::vector<std::string>
split_csv_line(const std::string& line)
{
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) {
      field.pop_back();
    }
    size_t start = field.find_first_not_of(' ');
    out.push_back(start == std::string::npos ? std::string() : field.substr(start));
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double
parse_double(const std::string& s, size_t line_no)
{
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    fail(ErrorKind::io,
         "line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  }
  return v;
}

} // namespace

Dataset
read_dataset_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line)) {
    fail(ErrorKind::io, "empty CSV input");
  }
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "y") {
    fail(ErrorKind::io, "CSV header must start with column \"y\"");
  }
  bool has_intercept = false;
  for (size_t j = 1; j < header.size(); ++j) {
    has_intercept = has_intercept || header[j] == "intercept";
  }

  std::vector<std::string> names;
  if (!has_intercept) {
    names.emplace_back("intercept");
  }
  names.insert(names.end(), header.begin() + 1, header.end());

  std::vector<double> ys;
  std::vector<std::vector<double>> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      fail(ErrorKind::io,
           "line " + std::to_string(line_no) + ": expected " +
             std::to_string(header.size()) + " fields, got " +
             std::to_string(fields.size()));
    }
    ys.push_back(parse_double(fields[0], line_no));
    std::vector<double> row;
    if (!has_intercept) {
      row.push_back(1.0);
    }
    for (size_t j = 1; j < fields.size(); ++j) {
      row.push_back(parse_double(fields[j], line_no));
    }
    rows.push_back(std::move(row));
  }

  const auto n = static_cast<Eigen::Index>(ys.size());
  const auto d = static_cast<Eigen::Index>(names.size());
  Vector y(n);
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = ys[static_cast<size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) {
      x(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  return Dataset(std::move(y), std::move(x), std::move(names));
}

Dataset
read_dataset_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    fail(ErrorKind::io, "cannot open data file '" + path + "'");
  }
  return read_dataset_csv(in);
}

void
write_dataset_csv(std::ostream& out, const Dataset& data)
{
  const auto& names = data.names();
  out << "y";
  for (const auto& nm : names) {
    out << ',' << nm;
  }
  out << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out << data.y()(i);
    for (Eigen::Index j = 0; j < data.d(); ++j) {
      out << ',' << data.x()(i, j);
    }
    out << '\n';
  }
}

} // namespace ckqr
