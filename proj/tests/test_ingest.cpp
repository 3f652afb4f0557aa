#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <string>

#include "ppipw/errors.hpp"
#include "ppipw/ingest.hpp"

using namespace ppipw;

namespace {

struct TempCsv {
  std::string path;
  explicit TempCsv(const std::string& contents)
      : path("/tmp/ppipw_test_" + std::to_string(counter++) + ".csv") {
    std::ofstream out(path);
    out << contents;
  }
  ~TempCsv() { std::remove(path.c_str()); }
  static inline int counter = 0;
};

CsvSchema schema_xy() {
  return CsvSchema{"t", "y", {"x0", "x1"}};
}

}  // namespace

TEST_CASE("load_csv parses a well-formed file") {
  TempCsv file("t,y,x0,x1\n1,2.5,3,4\n0,-1.0,0,0\n");
  auto staged = load_csv(file.path, schema_xy());
  CHECK(staged.covariates.rows() == 2);
  CHECK(staged.covariates(0, 0) == 3.0);
  CHECK(staged.covariates(0, 1) == 4.0);
  CHECK(staged.treatments[0] == 1);
  CHECK(staged.treatments[1] == 0);
  CHECK(staged.outcomes[0] == 2.5);
}

TEST_CASE("load_csv tolerates column reordering, spaces, and CRLF") {
  TempCsv file("x1, y ,t,x0\r\n 4 ,2.5,1, 3\r\n");
  auto staged = load_csv(file.path, schema_xy());
  CHECK(staged.covariates(0, 0) == 3.0);
  CHECK(staged.covariates(0, 1) == 4.0);
  CHECK(staged.outcomes[0] == 2.5);
}

TEST_CASE("load_csv error reporting names the offending cell") {
  SUBCASE("missing column") {
    TempCsv file("t,y,x0\n1,1,1\n");
    CHECK_THROWS_WITH_AS(load_csv(file.path, schema_xy()),
                         doctest::Contains("missing column 'x1'"), ParseError);
  }
  SUBCASE("non-numeric cell") {
    TempCsv file("t,y,x0,x1\n1,abc,0,0\n");
    CHECK_THROWS_WITH_AS(load_csv(file.path, schema_xy()),
                         doctest::Contains("column 'y'"), ParseError);
  }
  SUBCASE("non-binary treatment") {
    TempCsv file("t,y,x0,x1\n2,1,0,0\n");
    CHECK_THROWS_WITH_AS(load_csv(file.path, schema_xy()),
                         doctest::Contains("not 0 or 1"), ParseError);
  }
  SUBCASE("non-finite value") {
    TempCsv file("t,y,x0,x1\n1,inf,0,0\n");
    CHECK_THROWS_AS(load_csv(file.path, schema_xy()), ParseError);
  }
  SUBCASE("ragged row reports its index") {
    TempCsv file("t,y,x0,x1\n1,1,0,0\n1,1,0\n");
    CHECK_THROWS_WITH_AS(load_csv(file.path, schema_xy()),
                         doctest::Contains("row 2"), ParseError);
  }
  SUBCASE("header only") {
    TempCsv file("t,y,x0,x1\n");
    CHECK_THROWS_AS(load_csv(file.path, schema_xy()), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_csv("/tmp/ppipw_does_not_exist.csv", schema_xy()), ParseError);
  }
}

TEST_CASE("schema validation") {
  CsvSchema dup{"t", "t", {"x0"}};
  CHECK_THROWS_AS(dup.validate(), InvalidInputError);
  CsvSchema empty{"t", "y", {}};
  CHECK_THROWS_AS(empty.validate(), InvalidInputError);
}

TEST_CASE("normalize_unit_ball rescales by the max row norm") {
  StagedTable staged;
  staged.covariates.resize(2, 2);
  staged.covariates << 3.0, 4.0, 1.0, 0.0;
  staged.treatments.resize(2);
  staged.treatments << 1, 0;
  staged.outcomes.resize(2);
  staged.outcomes << 1.0, 2.0;
  auto normalized = normalize_unit_ball(staged);
  CHECK(normalized.scale_factor == doctest::Approx(5.0));
  CHECK(normalized.data.covariates()(0, 0) == doctest::Approx(0.6));
  CHECK(normalized.data.covariates()(0, 1) == doctest::Approx(0.8));
  CHECK(normalized.data.covariates()(1, 0) == doctest::Approx(0.2));

  SUBCASE("already-small rows are still rescaled to touch the sphere") {
    staged.covariates << 0.03, 0.04, 0.01, 0.0;
    auto rescaled = normalize_unit_ball(staged);
    CHECK(rescaled.scale_factor == doctest::Approx(0.05));
    CHECK(rescaled.data.covariates().rowwise().norm().maxCoeff() ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("all-zero covariates pass through") {
    staged.covariates.setZero();
    auto zero = normalize_unit_ball(staged);
    CHECK(zero.scale_factor == 1.0);
  }
}

namespace {

Dataset arm_pool(Eigen::Index treated, Eigen::Index control) {
  Eigen::Index n = treated + control;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 1);
  Eigen::VectorXi t(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 0.001 * static_cast<double>(i);
    t[i] = i < treated ? 1 : 0;
    y[i] = static_cast<double>(i);  // unique per unit: tracks identity
  }
  return Dataset(std::move(x), std::move(t), std::move(y));
}

}  // namespace

TEST_CASE("ihdp-style resampling draws balanced sets with replacement") {
  auto pool = arm_pool(139, 608);
  ResampleProtocol protocol;  // defaults: fit 250/arm, estimate 100/arm
  RngStream stream(1, derive_stream_id(0, "resample"));
  auto [fit, est] = resample(pool, protocol, stream);
  CHECK(fit.n_rows() == 500);
  CHECK(est.n_rows() == 200);
  CHECK(fit.treatments().sum() == 250);
  CHECK(est.treatments().sum() == 100);
  // 250 treated draws from a 139-unit arm require replacement.
}

TEST_CASE("lalonde-style resampling keeps fit and estimate units distinct") {
  auto pool = arm_pool(300, 400);
  ResampleProtocol protocol;
  protocol.kind = ResampleKind::lalonde_balanced;
  protocol.fit_per_arm = 250;
  protocol.estimate_per_arm = 100;
  RngStream stream(2, derive_stream_id(1, "resample"));
  auto [fit, est] = resample(pool, protocol, stream);
  CHECK(fit.n_rows() == 500);
  CHECK(est.n_rows() == 200);
  // Outcomes are unique unit ids; no id may appear in both sets.
  std::set<double> est_ids;
  for (Eigen::Index i = 0; i < est.n_rows(); ++i) est_ids.insert(est.outcomes()[i]);
  CHECK(est_ids.size() == 200);  // without replacement
  for (Eigen::Index i = 0; i < fit.n_rows(); ++i)
    CHECK(est_ids.count(fit.outcomes()[i]) == 0);
}

TEST_CASE("resample arm-exhaustion errors") {
  RngStream stream(3, 0);
  SUBCASE("empty arm") {
    auto pool = arm_pool(5, 0);
    // arm_pool with 0 controls makes an all-treated dataset
    ResampleProtocol protocol;
    CHECK_THROWS_AS(resample(pool, protocol, stream), InvalidInputError);
  }
  SUBCASE("without-replacement overdraw") {
    auto pool = arm_pool(50, 400);
    ResampleProtocol protocol;
    protocol.kind = ResampleKind::lalonde_balanced;
    protocol.estimate_per_arm = 100;  // > 50 treated
    CHECK_THROWS_AS(resample(pool, protocol, stream), InvalidInputError);
  }
  SUBCASE("estimate set consumes a whole arm") {
    auto pool = arm_pool(100, 400);
    ResampleProtocol protocol;
    protocol.kind = ResampleKind::lalonde_balanced;
    protocol.estimate_per_arm = 100;  // leaves no treated fit pool
    CHECK_THROWS_AS(resample(pool, protocol, stream), InvalidInputError);
  }
}
