#include <doctest.h>

#include <cmath>

#include "ppipw/errors.hpp"
#include "ppipw/estimators.hpp"
#include "ppipw/propensity.hpp"

#include "support/oracles.hpp"

using namespace ppipw;

namespace {

Dataset make_dataset(std::initializer_list<double> x0, std::initializer_list<int> ts,
                     std::initializer_list<double> ys) {
  Eigen::Index n = static_cast<Eigen::Index>(ts.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, 1);
  Eigen::VectorXi t(n);
  Eigen::VectorXd y(n);
  Eigen::Index i = 0;
  for (double v : x0) x(i++, 0) = v;
  i = 0;
  for (int v : ts) t[i++] = v;
  i = 0;
  for (double v : ys) y[i++] = v;
  return Dataset(std::move(x), std::move(t), std::move(y));
}

}  // namespace

TEST_CASE("ipw_ate closed-form values") {
  SUBCASE("single treated unit") {
    auto data = make_dataset({0.0}, {1}, {2.0});
    Eigen::VectorXd scores(1);
    scores << 0.25;
    auto est = ipw_ate(data, scores);
    CHECK(est.value == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(*est.mu1 == doctest::Approx(8.0));
    CHECK(*est.mu0 == 0.0);
    CHECK(est.stage == PrivacyStage::non_private);
    CHECK(est.n_used == 1);
  }
  SUBCASE("two units, both arms") {
    auto data = make_dataset({0.0, 0.0}, {1, 0}, {1.0, 1.0});
    Eigen::VectorXd scores(2);
    scores << 0.5, 0.5;
    auto est = ipw_ate(data, scores);
    // mu1 = (1/2)(1/0.5) = 1, mu0 = (1/2)(1/0.5) = 1.
    CHECK(est.value == doctest::Approx(0.0));
    CHECK(*est.mu1 == doctest::Approx(1.0));
  }
  SUBCASE("boundary score throws") {
    auto data = make_dataset({0.0}, {1}, {1.0});
    Eigen::VectorXd scores(1);
    scores << 0.0;
    CHECK_THROWS_AS(ipw_ate(data, scores), PositivityError);
    scores << 1.0;
    CHECK_THROWS_AS(ipw_ate(data, scores), PositivityError);
  }
  SUBCASE("length mismatch throws") {
    auto data = make_dataset({0.0}, {1}, {1.0});
    Eigen::VectorXd scores(2);
    scores << 0.5, 0.5;
    CHECK_THROWS_AS(ipw_ate(data, scores), InvalidInputError);
  }
}

TEST_CASE("ipw_ate_trimmed floors the denominators") {
  auto data = make_dataset({0.0}, {1}, {1.0});
  Eigen::VectorXd scores(1);
  scores << 0.05;
  auto est = ipw_ate_trimmed(data, scores, 0.1);
  CHECK(est.value == doctest::Approx(10.0).epsilon(1e-14));  // 1/max(0.1, 0.05)
  CHECK(est.trim_xi == 0.1);

  // Scores on the boundary are fine once trimmed.
  scores << 1.0;
  CHECK_NOTHROW(ipw_ate_trimmed(data, scores, 0.1));
  CHECK_THROWS_AS(ipw_ate_trimmed(data, scores, 0.0), InvalidInputError);
  CHECK_THROWS_AS(ipw_ate_trimmed(data, scores, 1.0), InvalidInputError);
}

TEST_CASE("trimmed ATE obeys the 2 c_y / xi envelope") {
  RngStream gen(61, 0);
  for (int rep = 0; rep < 200; ++rep) {
    auto data = oracles::random_dataset(gen, 30, 3);  // |y| <= 2
    Eigen::VectorXd scores(30);
    for (int i = 0; i < 30; ++i) scores[i] = gen.uniform();
    double xi = 0.02 + 0.3 * gen.uniform();
    auto est = ipw_ate_trimmed(data, scores, xi);
    CHECK(std::abs(est.value) <= 2.0 * 2.0 / xi + 1e-9);
  }
}

TEST_CASE("trimmed ATE converges to the untrimmed one as xi shrinks") {
  RngStream gen(62, 0);
  auto data = oracles::random_dataset(gen, 20, 2);
  Eigen::VectorXd scores(20);
  for (int i = 0; i < 20; ++i) scores[i] = 0.2 + 0.6 * gen.uniform();  // in [0.2, 0.8]
  auto untrimmed = ipw_ate(data, scores);
  auto trimmed = ipw_ate_trimmed(data, scores, 0.1);  // below every denominator
  CHECK(trimmed.value == doctest::Approx(untrimmed.value).epsilon(1e-14));
}

TEST_CASE("ATE is invariant under row permutation") {
  RngStream gen(63, 0);
  auto data = oracles::random_dataset(gen, 25, 3);
  Eigen::VectorXd scores(25);
  for (int i = 0; i < 25; ++i) scores[i] = 0.1 + 0.8 * gen.uniform();
  double reference = ipw_ate(data, scores).value;
  auto perm = gen.permutation(25);
  auto shuffled = data.select(perm);
  Eigen::VectorXd shuffled_scores(25);
  for (std::size_t k = 0; k < perm.size(); ++k)
    shuffled_scores[static_cast<Eigen::Index>(k)] =
        scores[static_cast<Eigen::Index>(perm[k])];
  CHECK(ipw_ate(shuffled, shuffled_scores).value ==
        doctest::Approx(reference).epsilon(1e-12));
}

TEST_CASE("ATE is linear in the outcomes") {
  RngStream gen(64, 0);
  auto data = oracles::random_dataset(gen, 15, 2);
  Eigen::VectorXd scores(15);
  for (int i = 0; i < 15; ++i) scores[i] = 0.3 + 0.4 * gen.uniform();
  double base = ipw_ate(data, scores).value;
  Dataset scaled(data.covariates(), data.treatments(), 3.0 * data.outcomes());
  CHECK(ipw_ate(scaled, scores).value == doctest::Approx(3.0 * base).epsilon(1e-12));
}

TEST_CASE("ipw_att closed-form values") {
  // One treated (y=1), one control (y=1) with w'x = ln 3, so odds = 3:
  //   (1/2)(1 - 3) = -1... choose y to hit -2:
  auto data = make_dataset({0.0, 0.5}, {1, 0}, {1.0, 1.0});
  Eigen::VectorXd w(1);
  w << std::log(3.0) / 0.5;  // margin ln 3 on the control row
  // Dataset rows must stay in the unit ball: |ln3/0.5 * 0.5| fine, x=0.5 ok.
  auto est = ipw_att(data, w);
  CHECK(est.value == doctest::Approx(0.5 * (1.0 - 3.0)).epsilon(1e-12));
  CHECK(est.estimand == Estimand::ATT);

  SUBCASE("odds cap") {
    auto capped = ipw_att(data, w, 2.0);
    CHECK(capped.value == doctest::Approx(0.5 * (1.0 - 2.0)).epsilon(1e-12));
  }
  SUBCASE("zero weights reduce to a signed mean") {
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    CHECK(ipw_att(data, zero).value == doctest::Approx(0.0));
  }
}

TEST_CASE("ipw_atc closed-form values") {
  // Treated row with margin ln 2: contributes y exp(-ln2) = y/2.
  auto data = make_dataset({0.5, 0.0}, {1, 0}, {2.0, 1.0});
  Eigen::VectorXd w(1);
  w << std::log(2.0) / 0.5;
  auto est = ipw_atc(data, w);
  CHECK(est.value == doctest::Approx(0.5 * (2.0 * 0.5 - 1.0)).epsilon(1e-12));
  CHECK(est.estimand == Estimand::ATC);
}

TEST_CASE("ATT odds form agrees with the score-ratio form") {
  RngStream gen(65, 0);
  for (int rep = 0; rep < 50; ++rep) {
    auto data = oracles::random_dataset(gen, 20, 3);
    Eigen::VectorXd w = gen.standard_normal_vector(3);
    double via_odds = ipw_att(data, w).value;
    // Independent evaluation through pi/(1-pi) per row.
    double acc = 0.0;
    for (Eigen::Index i = 0; i < 20; ++i) {
      double margin = data.covariates().row(i).dot(w);
      double pi = 1.0 / (1.0 + std::exp(-margin));
      double y = data.outcomes()[i];
      acc += data.treatments()[i] == 1 ? y : -(pi / (1.0 - pi)) * y;
    }
    CHECK(via_odds == doctest::Approx(acc / 20.0).epsilon(1e-10));
  }
}

TEST_CASE("all-treated ATE with scores 1 after trimming is the outcome mean over xi") {
  auto data = make_dataset({0.0, 0.0}, {1, 1}, {3.0, 5.0});
  Eigen::VectorXd scores(2);
  scores << 1.0, 1.0;
  auto est = ipw_ate_trimmed(data, scores, 0.5);
  CHECK(est.value == doctest::Approx(4.0));  // mean(y)/max(0.5,1) = mean(y)
  CHECK(*est.mu0 == 0.0);
}

TEST_CASE("partially private estimates score through the noisy weights") {
  RngStream gen(66, 0);
  auto data = oracles::random_dataset(gen, 40, 3);
  PropensityModel model;
  model.weights = gen.standard_normal_vector(3);
  model.lambda = 0.1;
  model.m_train = 1000;
  PrivacyBudget budget(0.5, 1e-6);
  RngStream noise(66, 1);
  auto pm = privatize_weights(model, budget, noise);

  auto est = partially_private_ate(data, pm, 0.05);
  CHECK(est.stage == PrivacyStage::dp_wrt_Dm);
  auto direct = ipw_ate_trimmed(data, score_rows(pm.noisy_weights, data), 0.05);
  CHECK(est.value == direct.value);

  auto att = partially_private_att(data, pm);
  CHECK(att.stage == PrivacyStage::dp_wrt_Dm);
  CHECK(att.value == ipw_att(data, pm.noisy_weights).value);
  auto atc = partially_private_atc(data, pm);
  CHECK(atc.value == ipw_atc(data, pm.noisy_weights).value);
}

TEST_CASE("fully_private_estimate promotes the stage and records sigma") {
  RngStream gen(67, 0);
  auto data = oracles::random_dataset(gen, 40, 3);
  PropensityModel model;
  model.weights = Eigen::VectorXd::Zero(3);
  model.lambda = 0.1;
  model.m_train = 1000;
  PrivacyBudget budget(0.5, 1e-6);
  RngStream noise(67, 1);
  auto pm = privatize_weights(model, budget, noise);
  auto partial = partially_private_ate(data, pm, 0.05);

  OutcomeBounds bounds{2.0, 0.05, 0.95, 1.0};
  RngStream scalar(67, 2);
  auto full = fully_private_estimate(partial, bounds, budget, scalar);
  CHECK(full.stage == PrivacyStage::dp_wrt_all);
  CHECK(full.sigma_n.has_value());
  CHECK(!full.mu1.has_value());
  CHECK(!full.mu0.has_value());
  // sigma from sensitivity (2*2/40)*max(1/0.05, 1/0.05) = 2.0
  CHECK(*full.sigma_n ==
        doctest::Approx(2.0 * std::sqrt(2.0 * std::log(1.25e6)) / 0.5).epsilon(1e-12));

  RngStream scalar2(67, 2);
  auto full2 = fully_private_estimate(partial, bounds, budget, scalar2);
  CHECK(full2.value == full.value);

  SUBCASE("non-private input is rejected") {
    auto plain = ipw_ate_trimmed(data, score_rows(model.weights, data), 0.05);
    RngStream s(67, 3);
    CHECK_THROWS_AS(fully_private_estimate(plain, bounds, budget, s), InvalidInputError);
  }
}
