// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "taonet/error.hpp"
#include "taonet/eval/metrics.hpp"
#include "test_support.hpp"

using namespace taonet;
using namespace taonet::eval;
using taonet::testing::read_text;
using taonet::testing::TempDir;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected taonet::Error");
  return ErrorCode::kIoFailure;
}

using Labels = std::vector<std::string>;

// Per-class arithmetic written out from raw pairs, without a matrix.
struct OracleClass {
  double p, r, f;
};

OracleClass oracle_class(const Labels& gold, const Labels& pred, const std::string& c) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == c && pred[i] == c) tp += 1;
    if (gold[i] != c && pred[i] == c) fp += 1;
    if (gold[i] == c && pred[i] != c) fn += 1;
  }
  const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return {p, r, p + r > 0 ? 2 * p * r / (p + r) : 0.0};
}

std::pair<Labels, Labels> random_pairs(std::mt19937& gen, const Labels& classes, std::size_t n) {
  std::uniform_int_distribution<std::size_t> pick(0, classes.size() - 1);
  Labels g, p;
  for (std::size_t i = 0; i < n; ++i) {
    g.push_back(classes[pick(gen)]);
    p.push_back(classes[pick(gen)]);
  }
  return {g, p};
}

ConfusionMatrix matrix_of(std::vector<std::vector<std::uint64_t>> counts,
                          std::vector<std::uint64_t> overflow = {}) {
  ConfusionMatrix m;
  for (std::size_t i = 0; i < counts.size(); ++i) m.labels.push_back("c" + std::to_string(i));
  if (overflow.empty()) overflow.assign(counts.size(), 0);
  m.counts = std::move(counts);
  m.overflow = std::move(overflow);
  return m;
}

}  // namespace

TEST_CASE("confusion tallies pairs") {
  const Labels g{"A", "A", "B"}, p{"A", "A", "B"};
  const auto m = confusion(g, p);
  CHECK(m.labels == Labels{"A", "B"});
  CHECK(m.counts == std::vector<std::vector<std::uint64_t>>{{2, 0}, {0, 1}});
  CHECK(m.overflow == std::vector<std::uint64_t>{0, 0});

  const Labels g1{"A"}, p1{"UNMAPPED"};
  CHECK(confusion(g1, p1).overflow == std::vector<std::uint64_t>{1});

  // A predicted label that never occurs as gold also overflows.
  const Labels g2{"A", "A"}, p2{"Z", "A"};
  const auto m2 = confusion(g2, p2);
  CHECK(m2.labels == Labels{"A"});
  CHECK(m2.overflow[0] == 1);
  CHECK(m2.counts[0][0] == 1);

  const Labels shorter{"A"};
  CHECK(code_of([&] { confusion(g, shorter); }) == ErrorCode::kLengthMismatch);
  CHECK(code_of([&] { confusion(Labels{}, Labels{}); }) == ErrorCode::kLengthMismatch);
}

TEST_CASE("confusion axis follows the preferred order then first appearance") {
  const Labels g{"W", "Q", "X", "M"}, p{"W", "Q", "X", "M"};
  const Labels order{"M", "Q", "Y", "W"};  // Y absent from gold, X unlisted
  CHECK(confusion(g, p, order).labels == Labels{"M", "Q", "W", "X"});
}

TEST_CASE("confusion matches an independent pairwise tally") {
  std::mt19937 gen(20260101);
  const Labels classes{"A", "B", "C", "UNMAPPED"};
  for (int trial = 0; trial < 20; ++trial) {
    auto [g, p] = random_pairs(gen, classes, 50);
    for (auto& l : g) {
      if (l == "UNMAPPED") l = "A";
    }
    const auto m = confusion(g, p, Labels{"A", "B", "C"});
    std::map<std::pair<std::string, std::string>, std::uint64_t> tally;
    for (std::size_t i = 0; i < g.size(); ++i) ++tally[{g[i], p[i]}];
    std::uint64_t total = 0;
    for (std::size_t r = 0; r < m.size(); ++r) {
      for (std::size_t c = 0; c < m.size(); ++c) {
        CHECK(m.counts[r][c] == tally[{m.labels[r], m.labels[c]}]);
      }
      CHECK(m.overflow[r] == tally[{m.labels[r], "UNMAPPED"}]);
      CHECK(m.row_sum(r) == static_cast<std::uint64_t>(std::count(g.begin(), g.end(), m.labels[r])));
      total += m.row_sum(r);
    }
    CHECK(total == 50);
  }
}

TEST_CASE("metric examples") {
  const Labels g{"A", "B", "C", "A"};
  const auto perfect = compute_metrics(confusion(g, g));
  CHECK(perfect.macro_precision == 1.0);
  CHECK(perfect.macro_f1 == 1.0);
  CHECK(perfect.micro_f1 == 1.0);
  CHECK(perfect.macro_recall == 1.0);

  const Labels g2{"A", "B"}, p2{"B", "A"};
  const auto swapped = compute_metrics(confusion(g2, p2));
  CHECK(swapped.macro_precision == 0.0);
  CHECK(swapped.macro_f1 == 0.0);
  CHECK(swapped.micro_f1 == 0.0);

  CHECK(code_of([] { compute_metrics(ConfusionMatrix{}); }) == ErrorCode::kEmptyMatrix);
  CHECK(code_of([] { compute_metrics(matrix_of({{0, 0}, {0, 0}})); }) == ErrorCode::kEmptyMatrix);
}

TEST_CASE("asymmetric three-class fixture against per-class arithmetic") {
  // A: 4 gold, B: 3 gold, C: 2 gold; C is never predicted.
  const Labels g{"A", "A", "A", "A", "B", "B", "B", "C", "C"};
  const Labels p{"A", "A", "B", "A", "B", "A", "B", "A", "B"};
  const auto r = compute_metrics(confusion(g, p));
  // A: tp 3, fp 2, fn 1 -> p 3/5, r 3/4. B: tp 2, fp 2, fn 1 -> 1/2, 2/3. C: 0.
  const double fa = 2 * 0.6 * 0.75 / 1.35, fb = 2 * 0.5 * (2.0 / 3) / (0.5 + 2.0 / 3);
  REQUIRE(r.per_class.size() == 3);
  CHECK(r.per_class[0].precision == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(r.per_class[1].recall == doctest::Approx(2.0 / 3).epsilon(1e-15));
  CHECK(r.per_class[2].precision == 0.0);
  CHECK(r.per_class[2].f1 == 0.0);
  CHECK(r.macro_precision == doctest::Approx((0.6 + 0.5) / 3).epsilon(1e-15));
  CHECK(r.macro_recall == doctest::Approx((0.75 + 2.0 / 3) / 3).epsilon(1e-15));
  CHECK(r.macro_f1 == doctest::Approx((fa + fb) / 3).epsilon(1e-15));
  CHECK(r.micro_f1 == doctest::Approx(5.0 / 9).epsilon(1e-15));
  CHECK(r.per_class[0].support == 4);
}

TEST_CASE("random matrices agree with the pairwise oracle and the invariants") {
  std::mt19937 gen(7);
  const Labels classes{"A", "B", "C", "D", "E"};
  int with_overflow = 0, without_overflow = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + trial % 4;
    const Labels sub(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(k));
    auto [g, p] = random_pairs(gen, sub, 5 + trial % 60);
    const auto m = confusion(g, p, sub);
    const auto r = compute_metrics(m);

    double mp = 0, mr = 0, mf = 0, fmin = 1, fmax = 0;
    for (std::size_t c = 0; c < m.size(); ++c) {
      const auto o = oracle_class(g, p, m.labels[c]);
      CHECK(std::abs(r.per_class[c].precision - o.p) < 1e-12);
      CHECK(std::abs(r.per_class[c].recall - o.r) < 1e-12);
      CHECK(std::abs(r.per_class[c].f1 - o.f) < 1e-12);
      mp += o.p;
      mr += o.r;
      mf += o.f;
      fmin = std::min(fmin, o.f);
      fmax = std::max(fmax, o.f);
    }
    const double n = static_cast<double>(m.size());
    CHECK(std::abs(r.macro_precision - mp / n) < 1e-12);
    CHECK(std::abs(r.macro_recall - mr / n) < 1e-12);
    CHECK(std::abs(r.macro_f1 - mf / n) < 1e-12);

    std::size_t hits = 0;
    for (std::size_t i = 0; i < g.size(); ++i) hits += g[i] == p[i];
    const double acc = static_cast<double>(hits) / static_cast<double>(g.size());
    CHECK(std::abs(r.accuracy - acc) < 1e-12);
    CHECK(std::abs(r.micro_recall - acc) < 1e-12);
    // A predicted class absent from gold lands in overflow, which is FP for
    // no class; only then may micro F1 exceed accuracy.
    const bool overflow = std::any_of(m.overflow.begin(), m.overflow.end(), [](auto v) { return v > 0; });
    if (overflow) {
      ++with_overflow;
      CHECK(r.micro_f1 >= acc - 1e-12);
    } else {
      ++without_overflow;
      CHECK(r.micro_f1 == r.accuracy);
    }

    for (double v : {r.macro_precision, r.macro_recall, r.macro_f1, r.micro_f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(r.macro_f1 >= fmin - 1e-15);
    CHECK(r.macro_f1 <= fmax + 1e-15);
  }
  CHECK(with_overflow > 0);
  CHECK(without_overflow > 500);
}

TEST_CASE("permuting the label axis leaves the summary metrics unchanged") {
  std::mt19937 gen(99);
  const Labels classes{"A", "B", "C", "D"};
  for (int trial = 0; trial < 200; ++trial) {
    auto [g, p] = random_pairs(gen, classes, 40);
    Labels order = classes;
    const auto base = compute_metrics(confusion(g, p, order));
    std::shuffle(order.begin(), order.end(), gen);
    const auto m = confusion(g, p, order);
    const auto perm = compute_metrics(m);
    CHECK(perm.macro_precision == doctest::Approx(base.macro_precision).epsilon(1e-14));
    CHECK(perm.macro_f1 == doctest::Approx(base.macro_f1).epsilon(1e-14));
    CHECK(perm.macro_recall == doctest::Approx(base.macro_recall).epsilon(1e-14));
    CHECK(perm.micro_f1 == base.micro_f1);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto& row = perm.per_class[i];
      const auto it = std::find_if(base.per_class.begin(), base.per_class.end(),
                                   [&](const ClassMetrics& c) { return c.label == row.label; });
      REQUIRE(it != base.per_class.end());
      CHECK(it->f1 == row.f1);
    }
  }
}

TEST_CASE("overflow counts as a miss for the gold class only") {
  // Gold A twice, one predicted A and one UNMAPPED; gold B predicted B.
  const auto r = compute_metrics(matrix_of({{1, 0}, {0, 1}}, {1, 0}));
  CHECK(r.per_class[0].precision == 1.0);
  CHECK(r.per_class[0].recall == 0.5);
  CHECK(r.per_class[1].precision == 1.0);
  CHECK(r.accuracy == doctest::Approx(2.0 / 3));
  CHECK(r.micro_recall == doctest::Approx(2.0 / 3));
  CHECK(r.micro_precision == 1.0);
  CHECK(r.micro_f1 == doctest::Approx(0.8));
}

TEST_CASE("aggregate runs uses the population deviation") {
  MetricReport a, b;
  b.macro_precision = b.macro_f1 = b.micro_f1 = b.macro_recall = b.accuracy = 1.0;
  const std::vector<MetricReport> two{a, b};
  const auto s = aggregate_runs(two);
  REQUIRE(s.size() == 5);
  CHECK(s[0].name == "macro_precision");
  CHECK(s[3].name == "recall");
  for (const auto& m : s) {
    CHECK(m.mean == 0.5);
    CHECK(m.stddev == 0.5);
  }

  MetricReport x;
  x.macro_precision = 0.91;
  x.macro_f1 = 0.87;
  const std::vector<MetricReport> five(5, x);
  for (const auto& m : aggregate_runs(five)) CHECK(m.stddev == 0.0);
  const std::vector<MetricReport> one{x};
  const auto single = aggregate_runs(one);
  CHECK(single[0].mean == 0.91);
  CHECK(single[1].mean == 0.87);
  CHECK(single[0].stddev == 0.0);

  CHECK(code_of([] { aggregate_runs(std::vector<MetricReport>{}); }) == ErrorCode::kEmptyMatrix);
}

TEST_CASE("reports round-trip and emit deterministically") {
  TempDir dir("eval");
  const Labels g{"QQMail", "QQMusic", "WeChat", "WeChat", "Weibo"};
  const Labels p{"QQMail", "WeChat", "WeChat", "UNMAPPED", "Weibo"};
  const auto m = confusion(g, p);
  const auto r = compute_metrics(m);
  emit_report(r, m, dir.path());

  const auto back = read_metrics_csv(dir / "metrics.csv");
  CHECK(back.macro_precision == doctest::Approx(r.macro_precision).epsilon(1e-6));
  CHECK(back.macro_f1 == doctest::Approx(r.macro_f1).epsilon(1e-6));
  CHECK(back.micro_f1 == doctest::Approx(r.micro_f1).epsilon(1e-6));
  CHECK(back.macro_recall == doctest::Approx(r.macro_recall).epsilon(1e-6));
  REQUIRE(back.per_class.size() == r.per_class.size());
  for (std::size_t i = 0; i < r.per_class.size(); ++i) {
    CHECK(back.per_class[i].label == r.per_class[i].label);
    CHECK(back.per_class[i].support == r.per_class[i].support);
    CHECK(back.per_class[i].f1 == doctest::Approx(r.per_class[i].f1).epsilon(1e-6));
  }

  const auto csv = read_text(dir / "confusion.csv");
  CHECK(csv.rfind("gold\\predicted,QQMail,QQMusic,WeChat,Weibo,UNMAPPED\n", 0) == 0);
  CHECK(csv.find("WeChat,0,0,1,0,1\n") != std::string::npos);
  CHECK(read_text(dir / "confusion.txt").find("UNMAPPED") != std::string::npos);
  CHECK(read_text(dir / "metrics.csv").find("macro,,") != std::string::npos);

  const auto first = read_text(dir / "metrics.csv") + read_text(dir / "confusion.csv") +
                     read_text(dir / "confusion.txt");
  emit_report(r, m, dir.path(), "again_");
  const auto second = read_text(dir / "again_metrics.csv") + read_text(dir / "again_confusion.csv") +
                      read_text(dir / "again_confusion.txt");
  CHECK(first == second);

  CHECK(code_of([&] { emit_report(r, m, dir / "missing" / "deeper"); }) == ErrorCode::kIoFailure);
  CHECK(code_of([&] { read_metrics_csv(dir / "nope.csv"); }) == ErrorCode::kFileNotFound);
  taonet::testing::write_bytes(dir / "bad.csv", {'x', '\n'});
  CHECK(code_of([&] { read_metrics_csv(dir / "bad.csv"); }) == ErrorCode::kSchemaViolation);
}

TEST_CASE("labels with commas are quoted in csv") {
  TempDir dir("evalq");
  const Labels g{"a,b", "c"}, p{"a,b", "c"};
  const auto m = confusion(g, p);
  emit_report(compute_metrics(m), m, dir.path());
  CHECK(read_metrics_csv(dir / "metrics.csv").per_class[0].label == "a,b");
}
