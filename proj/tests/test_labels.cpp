#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chgh/labels.hpp"

using namespace chgh;

namespace {

// History with exact mean m and population std s over two steps.
Mat two_step_history(const std::vector<double>& means, const std::vector<double>& stds) {
  Mat h(means.size(), 2);
  for (size_t k = 0; k < means.size(); ++k) {
    h(k, 0) = means[k] - stds[k];
    h(k, 1) = means[k] + stds[k];
  }
  return h;
}

}  // namespace

TEST_CASE("equal class sizes when n divides the skill count") {
  Rng rng(1);
  Mat history(10, 4);
  Vec target(10);
  for (int k = 0; k < 10; ++k) {
    for (int t = 0; t < 4; ++t) history(k, t) = rng.uniform(0.0, 1.0);
    target(k) = rng.uniform(0.0, 1.0);
  }
  auto [labels, state] = discretize_shares(history, target, 5, View::Demand);
  Eigen::VectorXd counts = labels.onehot.colwise().sum();
  for (int c = 0; c < 5; ++c) CHECK(counts(c) == 2.0);
  for (int k = 0; k < 10; ++k) CHECK(labels.onehot.row(k).sum() == 1.0);
  (void)state;
}

TEST_CASE("constant history standardizes to zero") {
  Mat history = Mat::Constant(3, 4, 0.25);
  history.row(1) << 0.1, 0.2, 0.3, 0.4;  // one non-degenerate skill
  Vec target(3);
  target << 0.9, 0.25, 0.9;
  auto [labels, state] = discretize_shares(history, target, 2, View::Demand);
  CHECK(state.std_per_skill(0) == 0.0);
  CHECK(state.normalized_target(0) == 0.0);
  CHECK(state.normalized_target(2) == 0.0);
  CHECK(state.std_per_skill(1) > 0.0);
  (void)labels;
}

TEST_CASE("hand-computed standardization and class assignment") {
  // means (0.1, 0.2, 0.3), stds 0.05, targets 0.2 -> normalized (2, 0, -2).
  Mat history = two_step_history({0.1, 0.2, 0.3}, {0.05, 0.05, 0.05});
  Vec target = Vec::Constant(3, 0.2);
  auto [labels, state] = discretize_shares(history, target, 3, View::Demand);
  CHECK(state.normalized_target(0) == doctest::Approx(2.0));
  CHECK(state.normalized_target(1) == doctest::Approx(0.0));
  CHECK(state.normalized_target(2) == doctest::Approx(-2.0));
  // Ascending classes: skill 2 lowest, skill 1 middle, skill 0 highest.
  CHECK(labels.onehot(2, 0) == 1.0);
  CHECK(labels.onehot(1, 1) == 1.0);
  CHECK(labels.onehot(0, 2) == 1.0);
}

TEST_CASE("remainder classes go to the lowest indices") {
  Rng rng(2);
  Mat history(7, 3);
  Vec target(7);
  for (int k = 0; k < 7; ++k) {
    for (int t = 0; t < 3; ++t) history(k, t) = rng.uniform(0.0, 1.0);
    target(k) = rng.uniform(0.0, 1.0);
  }
  auto [labels, state] = discretize_shares(history, target, 5, View::Supply);
  Eigen::VectorXd counts = labels.onehot.colwise().sum();
  // 7 = 2 + 2 + 1 + 1 + 1
  CHECK(counts(0) == 2.0);
  CHECK(counts(1) == 2.0);
  CHECK(counts(2) == 1.0);
  CHECK(counts(3) == 1.0);
  CHECK(counts(4) == 1.0);
  (void)state;
}

TEST_CASE("equal-frequency and affine invariance over randomized instances") {
  Rng rng(3);
  for (int n_skills : {7, 10, 53}) {
    for (int rep = 0; rep < 30; ++rep) {
      Mat history(n_skills, 5);
      Vec target(n_skills);
      for (int k = 0; k < n_skills; ++k) {
        for (int t = 0; t < 5; ++t) history(k, t) = rng.uniform(0.0, 1.0);
        target(k) = rng.uniform(0.0, 1.0);
      }
      auto [labels, state] = discretize_shares(history, target, 5, View::Demand);
      Eigen::VectorXd counts = labels.onehot.colwise().sum();
      CHECK(counts.maxCoeff() - counts.minCoeff() <= 1.0);

      // Per-skill positive affine transform of history and target.
      Mat history2 = history;
      Vec target2 = target;
      for (int k = 0; k < n_skills; ++k) {
        double a = rng.uniform(0.5, 3.0);
        double b = rng.uniform(-1.0, 1.0);
        history2.row(k) = a * history.row(k).array() + b;
        target2(k) = a * target(k) + b;
      }
      auto [labels2, state2] = discretize_shares(history2, target2, 5, View::Demand);
      CHECK(labels.onehot == labels2.onehot);
      (void)state;
      (void)state2;
    }
  }
}

TEST_CASE("discretizer input validation") {
  Mat history(3, 1);  // too short
  Vec target(3);
  CHECK_THROWS_AS(discretize_shares(history, target, 2, View::Demand), UserError);
  Mat ok(3, 2);
  CHECK_THROWS_AS(discretize_shares(ok, target, 4, View::Demand), UserError);  // n > skills
}

TEST_CASE("joint accuracy conjunctions") {
  CHECK(joint_accuracy({0, 1}, {2, 3}, {0, 1}, {2, 3}) == 1.0);
  // 4 skills, both views correct for exactly 2.
  CHECK(joint_accuracy({0, 1, 0, 1}, {0, 1, 1, 0}, {0, 1, 1, 1}, {0, 1, 1, 1}) == 0.5);
  // Supply all correct, demand all wrong.
  CHECK(joint_accuracy({1, 1}, {0, 0}, {1, 1}, {1, 1}) == 0.0);
  CHECK_THROWS_AS(joint_accuracy({0}, {0, 1}, {0}, {0}), InternalError);
}

TEST_CASE("perfect predictions give perfect metrics") {
  Mat labels = Mat::Zero(5, 5);
  for (int k = 0; k < 5; ++k) labels(k, k) = 1.0;
  LabelMatrix lm{View::Demand, labels};
  auto report = classification_metrics(labels, lm);
  CHECK(report.accuracy == 1.0);
  CHECK(report.weighted_f1 == doctest::Approx(1.0));
  CHECK(report.auc == doctest::Approx(1.0));
}

TEST_CASE("uniform predictions on balanced labels hit chance with lowest-index tie-break") {
  Mat probs = Mat::Constant(10, 5, 0.2);
  Mat onehot = Mat::Zero(10, 5);
  for (int k = 0; k < 10; ++k) onehot(k, k / 2) = 1.0;  // 2 per class
  LabelMatrix lm{View::Demand, onehot};
  auto pred = argmax_rows(probs);
  for (int k = 0; k < 10; ++k) CHECK(pred[k] == 0);  // tie-break to class 0
  auto report = classification_metrics(probs, lm);
  CHECK(report.accuracy == doctest::Approx(0.2));
  CHECK(report.auc == doctest::Approx(0.5));  // all scores tie
}

TEST_CASE("metrics match a hand-computed confusion matrix") {
  Mat probs(3, 3);
  probs << 0.7, 0.2, 0.1,
           0.1, 0.8, 0.1,
           0.5, 0.4, 0.1;
  Mat onehot = Mat::Zero(3, 3);
  onehot(0, 0) = 1.0;
  onehot(1, 1) = 1.0;
  onehot(2, 2) = 1.0;
  LabelMatrix lm{View::Demand, onehot};
  auto report = classification_metrics(probs, lm);
  CHECK(report.accuracy == doctest::Approx(2.0 / 3.0));
  // class 0: P=1/2 R=1 F1=2/3; class 1: F1=1; class 2: F1=0; equal supports.
  CHECK(report.weighted_f1 == doctest::Approx((2.0 / 3.0 + 1.0 + 0.0) / 3.0));
  // classes 0 and 1 separate perfectly; class 2 scores all tie at 0.1.
  CHECK(report.auc == doctest::Approx((1.0 + 1.0 + 0.5) / 3.0));
}

TEST_CASE("metrics reject rows that do not sum to one") {
  Mat probs = Mat::Constant(2, 2, 0.7);
  Mat onehot = Mat::Zero(2, 2);
  onehot(0, 0) = onehot(1, 1) = 1.0;
  LabelMatrix lm{View::Demand, onehot};
  CHECK_THROWS_AS(classification_metrics(probs, lm), InternalError);
}

TEST_CASE("absent classes carry zero weight") {
  Mat probs(2, 3);
  probs << 0.6, 0.3, 0.1,
           0.2, 0.7, 0.1;
  Mat onehot = Mat::Zero(2, 3);
  onehot(0, 0) = 1.0;
  onehot(1, 1) = 1.0;  // class 2 absent
  LabelMatrix lm{View::Demand, onehot};
  auto report = classification_metrics(probs, lm);
  CHECK(report.accuracy == 1.0);
  CHECK(report.weighted_f1 == doctest::Approx(1.0));
  CHECK(report.auc == doctest::Approx(1.0));
}

TEST_CASE("joint accuracy never exceeds per-view accuracy (random property)") {
  Rng rng(9);
  for (int rep = 0; rep < 50; ++rep) {
    int n = 20;
    std::vector<int> ps(n), pd(n), ts(n), td(n);
    for (int k = 0; k < n; ++k) {
      ps[k] = static_cast<int>(rng.uniform_int(0, 4));
      pd[k] = static_cast<int>(rng.uniform_int(0, 4));
      ts[k] = static_cast<int>(rng.uniform_int(0, 4));
      td[k] = static_cast<int>(rng.uniform_int(0, 4));
    }
    double joint = joint_accuracy(ps, pd, ts, td);
    double acc_s = 0.0, acc_d = 0.0;
    for (int k = 0; k < n; ++k) {
      acc_s += ps[k] == ts[k] ? 1.0 : 0.0;
      acc_d += pd[k] == td[k] ? 1.0 : 0.0;
    }
    acc_s /= n;
    acc_d /= n;
    CHECK(joint <= std::min(acc_s, acc_d) + 1e-12);
  }
}

TEST_CASE("determinism: identical inputs produce identical labels") {
  Rng rng(4);
  Mat history(12, 5);
  Vec target(12);
  for (int k = 0; k < 12; ++k) {
    for (int t = 0; t < 5; ++t) history(k, t) = rng.uniform(0.0, 1.0);
    target(k) = rng.uniform(0.0, 1.0);
  }
  auto [l1, s1] = discretize_shares(history, target, 5, View::Demand);
  auto [l2, s2] = discretize_shares(history, target, 5, View::Demand);
  CHECK(l1.onehot == l2.onehot);
  CHECK(s1.sorted_order == s2.sorted_order);
}
