#include "ckqr/dataset.hpp"

#include "doctest.h"

#include <sstream>

using namespace ckqr;

TEST_SUITE("dataset")
{
  TEST_CASE("validation")
  {
    Matrix x = Matrix::Ones(3, 1);
    Vector y(3);
    y << 1.0, 2.0, 3.0;
    const Dataset ok(y, x);
    CHECK(ok.n() == 3);
    CHECK(ok.x_mean()(0) == 1.0);

    CHECK_THROWS_AS(Dataset(y, Matrix::Ones(2, 1)), Error);
    CHECK_THROWS_AS(Dataset(Vector::Ones(1), Matrix::Ones(1, 1)), Error);
    Matrix dup(3, 2);
    dup << 1, 1, 1, 1, 1, 1;
    try {
      Dataset bad(y, dup);
      FAIL("rank-deficient design accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::rank_deficient);
    }
    y(1) = std::nan("");
    CHECK_THROWS_AS(Dataset(y, x), Error);
  }

  TEST_CASE("csv reading")
  {
    std::istringstream in("y,x\n1,0.5\n2,1.5\n4,2\n");
    const Dataset data = read_dataset_csv(in);
    CHECK(data.d() == 2);
    CHECK(data.names()[0] == "intercept");
    CHECK(data.names()[1] == "x");
    CHECK(data.x()(2, 1) == 2.0);

    std::istringstream ragged("y,x\n1,2\n3\n");
    CHECK_THROWS_AS(read_dataset_csv(ragged), Error);
    std::istringstream text("y\nabc\n");
    CHECK_THROWS_AS(read_dataset_csv(text), Error);
    CHECK_THROWS_AS(read_dataset_csv(std::string("/nonexistent/file.csv")), Error);
  }

  TEST_CASE("csv round trip is exact")
  {
    Matrix x(4, 2);
    x << 1, 0.1, 1, 1.0 / 3.0, 1, 2.718281828459045, 1, -7e-300;
    Vector y(4);
    y << 0.1 + 0.2, -1.0 / 7.0, 1e300, 5.0;
    const Dataset data(y, x, { "intercept", "z" });
    std::stringstream buf;
    write_dataset_csv(buf, data);
    const Dataset back = read_dataset_csv(buf);
    CHECK(back.d() == 2);
    CHECK(back.y() == data.y());
    CHECK(back.x() == data.x());
  }

  TEST_CASE("subset")
  {
    Matrix x(4, 2);
    x << 1, 0, 1, 1, 1, 2, 1, 3;
    const Dataset data(Vector::LinSpaced(4, 0, 3), x);
    const Dataset sub = data.subset({ 3, 0, 1 });
    CHECK(sub.n() == 3);
    CHECK(sub.y()(0) == 3.0);
    CHECK_THROWS_AS(data.subset({ 1, 1, 1 }), Error);
  }
}
