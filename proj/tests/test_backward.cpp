#include <gtest/gtest.h>

#include <map>
#include <random>

#include "support.hpp"

using namespace gdms;
using std::numbers::pi;

namespace {

double hausdorff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  auto directed = [](const std::vector<cplx>& x, const std::vector<cplx>& y) {
    double worst = 0.0;
    for (const auto& p : x) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : y) best = std::min(best, std::abs(p - q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

bool has_point(const std::vector<BackwardLeaf>& leaves, cplx z, double tol) {
  for (const auto& l : leaves)
    if (std::abs(l.point - z) <= tol) return true;
  return false;
}

}  // namespace

TEST(PreimageTree, SquareMapDepthThreeGivesEighthRootsOfUnity) {
  const auto leaves = preimage_tree(test::sample("z2"), 0, 1.0, 3);
  ASSERT_EQ(leaves.size(), 8u);
  for (int k = 0; k < 8; ++k) EXPECT_TRUE(has_point(leaves, std::polar(1.0, 2 * pi * k / 8), 1e-12)) << k;
  for (const auto& l : leaves) {
    EXPECT_NEAR(l.log_deriv, std::log(8.0), 1e-12);
    EXPECT_EQ(l.word.size(), 3u);
    EXPECT_FALSE(l.clustered);
  }
}

TEST(PreimageTree, SquareMapDepthOne) {
  const auto leaves = preimage_tree(test::sample("z2"), 0, 1.0, 1);
  ASSERT_EQ(leaves.size(), 2u);
  EXPECT_TRUE(has_point(leaves, 1.0, 1e-14));
  EXPECT_TRUE(has_point(leaves, -1.0, 1e-14));
  for (const auto& l : leaves) EXPECT_NEAR(l.log_deriv, std::log(2.0), 1e-14);
}

TEST(PreimageTree, TwoVertexDepthTwoSolvesTheSextic) {
  const auto s = test::sample("two_vertex");
  const cplx target{0.3, 0.8};
  TreeStats stats;
  const auto leaves = preimage_tree(s, 0, target, 2, {}, &stats);
  ASSERT_EQ(leaves.size(), 6u);
  EXPECT_EQ(stats.leaves, 6u);
  for (const auto& l : leaves) {
    EXPECT_EQ(l.word.letters, (std::vector<GeneratorId>{0, 1}));  // z² on a→b, then z³ on b→a
    EXPECT_LE(std::abs(std::pow(l.point, 6) - target), 1e-12);
    const auto [value, logd] = forward_evaluate(s, l.word, l.point);
    EXPECT_LE(std::abs(value - target), 1e-8 * (1 + std::abs(target)));
    EXPECT_NEAR(logd, l.log_deriv, 1e-10);
    EXPECT_NEAR(l.log_deriv, std::log(6.0 * std::pow(std::abs(l.point), 5)), 1e-10);
  }
}

TEST(PreimageTree, LeafCountsAndResidualsOnRandomSystems) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  for (int k = 0; k < 30; ++k) {
    const auto s = test::random_system(rng, {3, 4, 3, k % 2 == 1});
    const VertexId j = rng() % s.vertex_count();
    const cplx target{box(rng), box(rng)};
    const std::size_t depth = 1 + rng() % 3;
    const auto leaves = preimage_tree(s, j, target, depth);

    std::map<std::vector<GeneratorId>, std::size_t> per_word;
    for (const auto& l : leaves) {
      ++per_word[l.word.letters];
      EXPECT_EQ(l.word.terminal_vertex(s), j);
      EXPECT_TRUE(l.word.admissible(s));
      EXPECT_TRUE(std::isfinite(l.log_deriv));
      const auto [value, logd] = forward_evaluate(s, l.word, l.point);
      EXPECT_LE(std::abs(value - target), 1e-8 * (1 + std::abs(target)));
    }
    std::uint64_t expected = 0;
    enumerate_words(s, depth, std::nullopt, j, [&](std::span<const GeneratorId> w) {
      const Word word{{w.begin(), w.end()}};
      expected += word.degree(s);
      EXPECT_EQ(per_word[word.letters], word.degree(s));
    });
    EXPECT_EQ(leaves.size(), expected);
  }
}

TEST(PreimageTree, ChainRuleMatchesFiniteDifferences) {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  int checked = 0;
  for (int k = 0; k < 30; ++k) {
    const auto s = test::random_system(rng, {2, 3, 3, true});
    const cplx target{box(rng), box(rng)};
    const auto leaves = preimage_tree(s, 0, target, 2);
    for (std::size_t i = 0; i < leaves.size(); i += 3) {
      const auto& l = leaves[i];
      const double h = 1e-6 * (1 + std::abs(l.point));
      const double fd = test::fd_derivative_modulus(s, l.word, l.point, h);
      const double chain = std::exp(l.log_deriv);
      if (chain < 1e-2) continue;  // too close to a critical point for a difference quotient
      EXPECT_LE(std::abs(fd - chain) / chain, 1e-4);
      ++checked;
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(PreimageTree, ParallelAndSerialFoldsAgree) {
  const auto s = test::sample("degrees23");
  TreeOptions one, many;
  one.threads = 1;
  many.threads = 8;
  const auto a = preimage_tree(s, 0, cplx{0.6, 0.8}, 4, one);
  const auto b = preimage_tree(s, 0, cplx{0.6, 0.8}, 4, many);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].word.letters, b[k].word.letters);
    EXPECT_EQ(a[k].point, b[k].point);
    EXPECT_EQ(a[k].log_deriv, b[k].log_deriv);
  }
}

TEST(PreimageTree, BudgetAndBlowupAreErrors) {
  TreeOptions small;
  small.budget = 100;
  EXPECT_THROW(preimage_tree(test::sample("degrees23"), 0, 1.0, 4, small), BudgetExceeded);

  const auto small_lead = parse_system(R"({"vertices":["v"],"edges":[{"id":"e","from":"v","to":"v",
      "maps":[{"num":[[0,0],[0,0],[1e-8,0]]}]}]})");
  TreeOptions tight;
  tight.blowup_bound = 1e3;
  EXPECT_THROW(preimage_tree(small_lead, 0, 1.0, 1, tight), BlowupError);
  EXPECT_EQ(preimage_tree(small_lead, 0, 1.0, 1).size(), 2u);

  // A leading coefficient at rounding level is a degree drop: both preimages go to infinity.
  const auto negligible = parse_system(R"({"vertices":["v"],"edges":[{"id":"e","from":"v","to":"v",
      "maps":[{"num":[[0,0],[0,0],[1e-15,0]]}]}]})");
  TreeStats st;
  EXPECT_TRUE(preimage_tree(negligible, 0, 1.0, 1, {}, &st).empty());
  EXPECT_EQ(st.infinite_leaves, 2u);
}

TEST(PreimageTree, VisitorSeesEveryInternalNode) {
  const auto s = test::sample("z2");
  std::vector<std::size_t> per_level(4, 0);
  TreeStats st;
  auto counts = fold_preimage_tree(
      s, 0, cplx{1.0}, 3, per_level, [](std::vector<std::size_t>& acc, const TreeNode& node) { ++acc[node.level]; },
      [](std::vector<std::size_t>& into, std::vector<std::size_t>&& from) {
        for (std::size_t k = 0; k < into.size(); ++k) into[k] += from[k];
      },
      {}, &st);
  EXPECT_EQ(counts[1], 2u);
  EXPECT_EQ(counts[2], 4u);
  EXPECT_EQ(counts[3], 8u);
  EXPECT_EQ(st.nodes, 14u);
}

TEST(RepellingFixedPoint, Examples) {
  auto r = repelling_fixed_point(test::sample("z2"), 0);
  EXPECT_TRUE(test::near(r.point, 1.0, 1e-12));
  EXPECT_NEAR(r.multiplier_modulus, 2.0, 1e-10);

  r = repelling_fixed_point(test::sample("z3"), 0);
  EXPECT_TRUE(test::near(r.point, 1.0, 1e-12));
  EXPECT_NEAR(r.multiplier_modulus, 3.0, 1e-10);

  r = repelling_fixed_point(test::sample("two_vertex"), 0);
  EXPECT_EQ(r.loop.size(), 2u);
  EXPECT_TRUE(test::near(r.point, 1.0, 1e-12));
  EXPECT_NEAR(r.multiplier_modulus, 6.0, 1e-9);
}

TEST(RepellingFixedPoint, InvariantsOnSamples) {
  for (const char* name : {"z2", "z4", "two_vertex", "degrees23", "cantor", "annulus", "z2minus2"}) {
    const auto s = test::sample(name);
    for (const auto& r : repelling_points(s)) {
      EXPECT_EQ(r.loop.initial_vertex(s), r.vertex);
      EXPECT_EQ(r.loop.terminal_vertex(s), r.vertex);
      const auto [value, logd] = forward_evaluate(s, r.loop, r.point);
      EXPECT_LE(std::abs(value - r.point), 1e-8) << name;
      EXPECT_GT(r.multiplier_modulus, 1 + 1e-6);
      EXPECT_NEAR(std::exp(logd), r.multiplier_modulus, 1e-8 * r.multiplier_modulus);
    }
  }
}

TEST(JuliaCloud, PointsOnTheUnitCircle) {
  for (const char* name : {"z2", "z3", "two_vertex"}) {
    const auto s = test::sample(name);
    for (VertexId v = 0; v < s.vertex_count(); ++v) {
      const auto cloud = julia_cloud(s, v, 500, 12, 9);
      ASSERT_EQ(cloud.points.size(), 500u);
      for (const auto& z : cloud.points) EXPECT_NEAR(std::abs(z), 1.0, 1e-8) << name;
    }
  }
}

TEST(JuliaCloud, ReproducibleForAnyThreadCount) {
  const auto s = test::sample("degrees23");
  CloudOptions one, many;
  one.threads = 1;
  many.threads = 7;
  EXPECT_EQ(julia_cloud(s, 0, 300, 10, 42, one).points, julia_cloud(s, 0, 300, 10, 42, many).points);
  EXPECT_NE(julia_cloud(s, 0, 300, 10, 42).points, julia_cloud(s, 0, 300, 10, 43).points);
}

TEST(JuliaCloud, CantorCloudStaysInTheUnitInterval) {
  const auto cloud = julia_cloud(test::sample("cantor"), 0, 400, 14, 1);
  for (const auto& z : cloud.points) {
    EXPECT_NEAR(z.imag(), 0.0, 1e-12);
    EXPECT_GE(z.real(), -1e-12);
    EXPECT_LE(z.real(), 1 + 1e-12);
    // no point in the removed middle third
    EXPECT_FALSE(z.real() > 1.0 / 3 + 1e-9 && z.real() < 2.0 / 3 - 1e-9);
  }
}

// One more backward step changes the cloud by at most 5·λ̂^{-d}·diameter.
TEST(JuliaCloudProperty, SelfSimilarUnderOneMoreBackwardStep) {
  const std::vector<std::pair<const char*, std::size_t>> cases{{"z2", 8}, {"z3", 5}, {"z4", 4}};
  for (const auto& [name, d] : cases) {
    const auto s = test::sample(name);
    const auto lam = expansion_estimate(s, d);
    const auto a = julia_cloud(s, 0, 4096, d, 3).points;
    const auto b = julia_cloud(s, 0, 4096, d + 1, 4).points;
    const double diameter = 2.0;
    EXPECT_LE(hausdorff(a, b), 5.0 * std::pow(lam.back(), -static_cast<double>(d)) * diameter) << name;
  }
}

TEST(ExpansionEstimate, Examples) {
  for (double l : expansion_estimate(test::sample("z2"), 6)) EXPECT_NEAR(l, 2.0, 1e-10);
  for (double l : expansion_estimate(test::sample("z3"), 5)) EXPECT_NEAR(l, 3.0, 1e-10);
  const auto lam = expansion_estimate(test::sample("two_vertex"), 4);
  EXPECT_NEAR(lam[1], std::sqrt(6.0), 1e-10);
  EXPECT_NEAR(lam[3], std::sqrt(6.0), 1e-10);
  EXPECT_THROW(expansion_estimate(test::sample("z2"), 1), ComputationError);
}

TEST(VscCheck, Examples) {
  auto r = vsc_check(test::sample("z2"), 256, 8, 1);
  EXPECT_TRUE(r.pass);
  ASSERT_EQ(r.vertices.size(), 1u);
  EXPECT_EQ(r.vertices[0].pairs, 0u);
  EXPECT_FALSE(r.vertices[0].min_separation.has_value());
  EXPECT_NE(r.note.find("HEURISTIC"), std::string::npos);

  r = vsc_check(test::sample("annulus"), 1024, 10, 1);
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.vertices[0].min_separation.has_value());
  EXPECT_LT(*r.vertices[0].min_separation, 1e-3 * r.vertices[0].scale);

  r = vsc_check(test::sample("two_vertex"), 256, 8, 1);
  EXPECT_TRUE(r.pass);
  for (const auto& v : r.vertices) EXPECT_EQ(v.pairs, 0u);
}

TEST(VscCheck, CantorPiecesAreSeparatedByTheMiddleThird) {
  const auto r = vsc_check(test::sample("cantor"), 1024, 12, 2);
  EXPECT_TRUE(r.pass);
  ASSERT_TRUE(r.vertices[0].min_separation.has_value());
  // g_0^{-1}(C) ⊂ [0, 1/3], g_1^{-1}(C) ⊂ [2/3, 1]
  EXPECT_GE(*r.vertices[0].min_separation, 1.0 / 3 - 1e-9);
  EXPECT_LE(*r.vertices[0].min_separation, 1.0 / 3 + 0.05);
}
