#include <gtest/gtest.h>

#include "support.hpp"
#include "published_iou.hpp"

using namespace damseg;
using namespace testsupport;

namespace {

constexpr std::size_t kBg = 0;
constexpr std::size_t kRoi = 1;

RoiMask block(int w, int h, int x0, int y0, int bw, int bh) {
  RoiMask m(w, h);
  for (int y = y0; y < y0 + bh; ++y)
    for (int x = x0; x < x0 + bw; ++x) m.set(x, y);
  return m;
}

// ROI = columns [0, split).
RoiMask left_part(int w, int h, int split) { return block(w, h, 0, 0, split, h); }

RoiMask stack(const RoiMask& top, const RoiMask& bottom) {
  RoiMask out(top.width(), top.height() + bottom.height());
  for (std::size_t i = 0; i < top.size(); ++i) out.set_index(i, top.test(i));
  for (std::size_t i = 0; i < bottom.size(); ++i) out.set_index(top.size() + i, bottom.test(i));
  return out;
}

void expect_opt_eq(const std::optional<double>& a, const std::optional<double>& b) {
  ASSERT_EQ(a.has_value(), b.has_value());
  if (a) {
    EXPECT_EQ(*a, *b);
  }
}

}  // namespace

TEST(Confusion, Examples) {
  const RoiMask m = random_mask(6, 5);
  const auto same = confusion(m, m);
  EXPECT_EQ(same.at(kBg, kRoi), 0u);
  EXPECT_EQ(same.at(kRoi, kBg), 0u);
  const auto miss = confusion(RoiMask(4, 4, true), RoiMask(4, 4));
  EXPECT_EQ(miss.at(kRoi, kBg), 16u);
  EXPECT_EQ(miss.total(), 16u);
  EXPECT_EQ(miss.at(kBg, kBg) + miss.at(kBg, kRoi) + miss.at(kRoi, kRoi), 0u);
  EXPECT_THROW(confusion(RoiMask(4, 4), RoiMask(4, 5)), DimensionError);
}

TEST(Confusion, MatchesPixelLoop) {
  for (int trial = 0; trial < 100; ++trial) {
    const RoiMask g = random_mask(8, 8), p = random_mask(8, 8);
    const auto cm = confusion(g, p);
    std::uint64_t cells[2][2] = {};
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) ++cells[g.at(x, y) ? 1 : 0][p.at(x, y) ? 1 : 0];
    for (int t = 0; t < 2; ++t)
      for (int q = 0; q < 2; ++q) EXPECT_EQ(cm.at(t, q), cells[t][q]);
  }
}

TEST(Iou, Examples) {
  const RoiMask m = random_mask(7, 7, 0.5);
  const auto same = iou(confusion(m, m));
  EXPECT_EQ(*same.per_class[kRoi], 1.0);
  EXPECT_EQ(*same.per_class[kBg], 1.0);

  const auto shifted = iou(confusion(block(6, 6, 1, 1, 2, 2), block(6, 6, 2, 1, 2, 2)));
  EXPECT_DOUBLE_EQ(*shifted.per_class[kRoi], 1.0 / 3.0);

  // Class absent from both masks -> undefined, not 0, and excluded from the mean.
  const auto bg_only = iou(confusion(RoiMask(3, 3), RoiMask(3, 3)));
  EXPECT_FALSE(bg_only.per_class[kRoi].has_value());
  EXPECT_EQ(*bg_only.mean, 1.0);
}

TEST(Iou, PublishedRowsAreMeansOfClassIous) {
  for (const auto& row : kPublishedIou) {
    const std::vector<std::optional<double>> ious{row.background_iou, row.roi_iou};
    EXPECT_NEAR(*mean_of_defined(ious), row.mean_iou, 0.0005) << row.model << " " << row.dataset;
  }
  const std::vector<std::optional<double>> fcn8{0.9801, 0.2778};
  EXPECT_NEAR(*mean_of_defined(fcn8), 0.62895, 1e-12);
}

TEST(PrecisionRecall, Examples) {
  const RoiMask m = random_mask(5, 5, 0.5);
  const auto perfect = precision_recall(confusion(m, m));
  for (std::size_t c : {kBg, kRoi}) {
    EXPECT_EQ(*perfect.precision[c], 1.0);
    EXPECT_EQ(*perfect.recall[c], 1.0);
  }
  const auto superset = precision_recall(confusion(block(6, 6, 2, 2, 2, 2), block(6, 6, 1, 1, 4, 4)));
  EXPECT_EQ(*superset.recall[kRoi], 1.0);
  EXPECT_LT(*superset.precision[kRoi], 1.0);

  // 4x4: gt rows 0 cols 0-3, pred cols 2-3 of rows 0-1 -> overlap 2.
  const auto half = precision_recall(confusion(block(4, 4, 0, 0, 4, 1), block(4, 4, 2, 0, 2, 2)));
  EXPECT_EQ(*half.precision[kRoi], 0.5);
  EXPECT_EQ(*half.recall[kRoi], 0.5);

  const auto empty_pred = precision_recall(confusion(block(3, 3, 0, 0, 1, 1), RoiMask(3, 3)));
  EXPECT_FALSE(empty_pred.precision[kRoi].has_value());
  EXPECT_EQ(*empty_pred.recall[kRoi], 0.0);
}

TEST(MetricsProperty, ConfusionPathMatchesOracle) {
  for (int trial = 0; trial < 300; ++trial) {
    const int w = rand_int(1, 16), h = rand_int(1, 16);
    const RoiMask g = random_mask(w, h), p = random_mask(w, h);
    const auto cm = confusion(g, p);
    const auto t = oracle_tallies(g, p);
    const auto i = iou(cm);
    const auto pr = precision_recall(cm);
    for (int c = 0; c < 2; ++c) {
      expect_opt_eq(i.per_class[c], oracle_ratio(t.tp[c], t.tp[c] + t.fp[c] + t.fn[c]));
      expect_opt_eq(pr.precision[c], oracle_ratio(t.tp[c], t.tp[c] + t.fp[c]));
      expect_opt_eq(pr.recall[c], oracle_ratio(t.tp[c], t.tp[c] + t.fn[c]));
      if (i.per_class[c]) {
        EXPECT_LE(*i.per_class[c], *pr.precision[c]);
        EXPECT_LE(*i.per_class[c], *pr.recall[c]);
      }
    }
  }
}

TEST(MetricsProperty, ConfusionComposesOverConcatenation) {
  for (int trial = 0; trial < 100; ++trial) {
    const int w = rand_int(1, 12);
    const RoiMask g1 = random_mask(w, rand_int(1, 12)), p1 = random_mask(g1.width(), g1.height());
    const RoiMask g2 = random_mask(w, rand_int(1, 12)), p2 = random_mask(g2.width(), g2.height());
    EXPECT_EQ(confusion(stack(g1, g2), stack(p1, p2)), confusion(g1, p1) + confusion(g2, p2));
    const auto a = confusion(g1, p1), b = confusion(g2, p2), c = confusion(g1, p2.same_shape(g1) ? p2 : p1);
    EXPECT_EQ((a + b) + c, a + (b + c));
  }
}

TEST(MetricsProperty, InvariantUnderJointPixelPermutation) {
  for (int trial = 0; trial < 100; ++trial) {
    const int w = rand_int(1, 12), h = rand_int(1, 12);
    const RoiMask g = random_mask(w, h), p = random_mask(w, h);
    std::vector<std::size_t> perm(g.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng());
    RoiMask gp(w, h), pp(w, h);
    for (std::size_t i = 0; i < perm.size(); ++i) {
      gp.set_index(i, g.test(perm[i]));
      pp.set_index(i, p.test(perm[i]));
    }
    EXPECT_EQ(confusion(g, p), confusion(gp, pp));
    const MaskPair a[] = {{g, p}}, b[] = {{gp, pp}};
    const auto ra = evaluate_run(a, AggregationMode::global), rb = evaluate_run(b, AggregationMode::global);
    for (std::size_t c : {kBg, kRoi}) {
      expect_opt_eq(ra.per_class[c].iou, rb.per_class[c].iou);
      expect_opt_eq(ra.per_class[c].precision, rb.per_class[c].precision);
      expect_opt_eq(ra.per_class[c].recall, rb.per_class[c].recall);
    }
  }
}

TEST(Bf, Examples) {
  const RoiMask m = block(20, 20, 4, 4, 8, 9);
  const auto same = bf_score(m, m);
  EXPECT_EQ(*same[kRoi].f1, 1.0);
  EXPECT_EQ(*same[kBg].f1, 1.0);
  const auto missing = bf_score(m, RoiMask(20, 20));
  EXPECT_EQ(*missing[kRoi].f1, 0.0);
  const auto neither = bf_score(RoiMask(5, 5), RoiMask(5, 5));
  EXPECT_FALSE(neither[kRoi].f1.has_value());
  EXPECT_EQ(*neither[kBg].f1, 1.0);
  EXPECT_THROW(bf_score(m, m, -1), ParameterError);
  EXPECT_THROW(bf_score(m, RoiMask(20, 21)), DimensionError);
}

TEST(Bf, StraightEdgeShiftAtTolerance) {
  for (int tol = 0; tol <= 4; ++tol) {
    const RoiMask gt = left_part(40, 12, 15);
    const auto at = bf_score(gt, left_part(40, 12, 15 + tol), tol);
    EXPECT_EQ(*at[kRoi].f1, 1.0) << tol;
    EXPECT_EQ(*at[kBg].f1, 1.0) << tol;
    const auto past = bf_score(gt, left_part(40, 12, 15 + tol + 1), tol);
    EXPECT_EQ(*past[kRoi].f1, 0.0) << tol;
    EXPECT_EQ(*past[kBg].f1, 0.0) << tol;
  }
}

TEST(Bf, DefaultTolerance) {
  EXPECT_EQ(default_bf_tolerance(16, 16), 1);
  EXPECT_EQ(default_bf_tolerance(224, 224), 2);   // 0.0075 * 316.8 = 2.38
  EXPECT_EQ(default_bf_tolerance(1000, 1000), 11);  // 10.6
}

TEST(MetricsProperty, BfMatchesAllPairsOracle) {
  for (int trial = 0; trial < 300; ++trial) {
    const int w = rand_int(1, 16), h = rand_int(1, 16), tol = rand_int(0, 4);
    const int x0 = rand_int(0, w - 1), y0 = rand_int(0, h - 1);
    const RoiMask g = trial % 3 ? random_mask(w, h)
                                : block(w, h, x0, y0, rand_int(0, w - x0), rand_int(0, h - y0));
    const RoiMask p = random_mask(w, h);
    const auto s = bf_score(g, p, tol);
    for (int c = 0; c < 2; ++c) expect_opt_eq(s[c].f1, oracle_bf(g, p, c == 1, tol));
  }
}

TEST(MetricsProperty, BfSymmetry) {
  for (int trial = 0; trial < 100; ++trial) {
    const int w = rand_int(2, 16), h = rand_int(2, 16), tol = rand_int(0, 3);
    const RoiMask g = random_mask(w, h), p = random_mask(w, h);
    const auto a = bf_score(g, p, tol), b = bf_score(p, g, tol);
    for (int c = 0; c < 2; ++c) {
      expect_opt_eq(a[c].precision, b[c].recall);
      expect_opt_eq(a[c].recall, b[c].precision);
      expect_opt_eq(a[c].f1, b[c].f1);
    }
  }
}

TEST(EvaluateRun, SinglePairModesAgree) {
  const RoiMask g = random_mask(9, 9), p = random_mask(9, 9);
  const MaskPair pairs[] = {{g, p}};
  const auto a = evaluate_run(pairs, AggregationMode::global);
  const auto b = evaluate_run(pairs, AggregationMode::per_image_mean);
  for (std::size_t c : {kBg, kRoi}) EXPECT_EQ(a.per_class[c], b.per_class[c]);
  EXPECT_EQ(a.mean_iou, b.mean_iou);
  EXPECT_THROW(evaluate_run(std::span<const MaskPair>{}, AggregationMode::global), ParameterError);
}

TEST(EvaluateRun, GlobalDiffersFromPerImageMean) {
  // A (2x2): gt all roi, pred left column -> roi IoU 2/4.
  // B (2x1): gt left pixel roi, pred nothing -> roi IoU 0/1.
  // per-image mean 0.25; global TP 2, FN 3 -> 0.4.
  const MaskPair pairs[] = {{RoiMask(2, 2, true), left_part(2, 2, 1)}, {left_part(2, 1, 1), RoiMask(2, 1)}};
  const auto per = evaluate_run(pairs, AggregationMode::per_image_mean);
  const auto glob = evaluate_run(pairs, AggregationMode::global);
  EXPECT_DOUBLE_EQ(*per.of(SegClass::roi).iou, 0.25);
  EXPECT_DOUBLE_EQ(*glob.of(SegClass::roi).iou, 0.4);
  // background: A has no gt background and 2 predicted -> 0; B 1/2.
  EXPECT_DOUBLE_EQ(*per.of(SegClass::background).iou, 0.25);
  EXPECT_DOUBLE_EQ(*glob.of(SegClass::background).iou, 0.25);
  EXPECT_DOUBLE_EQ(*glob.mean_iou, (0.4 + 0.25) / 2);
  EXPECT_EQ(glob.image_count, 2u);
}

TEST(EvaluateRun, UndefinedValuesSkippedInMeans) {
  // Image 1 has no ROI anywhere, so its roi metrics are undefined and must
  // not drag the per-image mean toward 0.
  const MaskPair pairs[] = {{RoiMask(4, 4), RoiMask(4, 4)}, {block(4, 4, 0, 0, 2, 2), block(4, 4, 0, 0, 2, 2)}};
  const auto r = evaluate_run(pairs, AggregationMode::per_image_mean);
  EXPECT_EQ(*r.of(SegClass::roi).iou, 1.0);
  EXPECT_EQ(*r.of(SegClass::roi).bf, 1.0);
  EXPECT_EQ(*r.mean_iou, 1.0);
}

TEST(MetricsReportJson, RoundTrip) {
  const MaskPair pairs[] = {{random_mask(8, 8), random_mask(8, 8)}, {RoiMask(3, 3), RoiMask(3, 3)}};
  for (auto mode : {AggregationMode::global, AggregationMode::per_image_mean}) {
    for (std::optional<int> tol : {std::optional<int>{}, std::optional<int>{3}}) {
      const auto r = evaluate_run(pairs, mode, tol);
      EXPECT_EQ(metrics_report_from_json(to_json(r)), r);
      EXPECT_EQ(metrics_report_from_json(nlohmann::json::parse(to_json(r).dump())), r);
    }
  }
  const MaskPair none[] = {{RoiMask(3, 3), RoiMask(3, 3)}};
  const auto j = to_json(evaluate_run(none, AggregationMode::global));
  EXPECT_TRUE(j["classes"]["roi"]["iou"].is_null());
  EXPECT_THROW(metrics_report_from_json(nlohmann::json::object()), FormatError);
  EXPECT_THROW(parse_aggregation_mode("median"), ParameterError);
}
