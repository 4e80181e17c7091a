#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace gdms;

namespace {

double inf_norm_diff(const std::vector<double>& a, const std::vector<double>& b, double scale) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - scale * b[k]));
  return m;
}

double sum_into(const GdmsSystem& s, const WeightFamily& w, VertexId j) {
  double sum = 0.0;
  for (const auto g : s.generators_into(j)) sum += w.a[g];
  return sum;
}

GdmsSystem cycle3() {
  return parse_system(R"({"vertices":["a","b","c"],"edges":[
    {"id":"ab","from":"a","to":"b","maps":[{"num":[[0,0],[0,0],[1,0]]}]},
    {"id":"bc","from":"b","to":"c","maps":[{"num":[[0,0],[0,0],[1,0]]}]},
    {"id":"ca","from":"c","to":"a","maps":[{"num":[[0,0],[0,0],[1,0]]}]}]})");
}

}  // namespace

TEST(DegreeMatrix, Examples) {
  EXPECT_EQ(degree_matrix(test::sample("degrees23"), 1.0).entries(0, 0), 5.0);
  const auto m1 = degree_matrix(test::sample("two_vertex"), 1.0);
  EXPECT_EQ(m1.entries(0, 0), 0.0);
  EXPECT_EQ(m1.entries(0, 1), 2.0);
  EXPECT_EQ(m1.entries(1, 0), 3.0);
  EXPECT_EQ(m1.entries(1, 1), 0.0);
  const auto m0 = degree_matrix(test::sample("two_vertex"), 0.0);
  EXPECT_EQ(m0.entries(0, 1), 1.0);
  EXPECT_EQ(m0.entries(1, 0), 1.0);
}

TEST(DegreeMatrix, AtZeroCountsMapsPerEdge) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 30; ++k) {
    const auto s = test::random_system(rng);
    const auto m = degree_matrix(s, 0.0);
    std::vector<std::vector<double>> counts(s.vertex_count(), std::vector<double>(s.vertex_count(), 0.0));
    for (const auto& e : s.edges()) counts[e.from][e.to] += static_cast<double>(e.maps.size());
    for (VertexId i = 0; i < s.vertex_count(); ++i)
      for (VertexId j = 0; j < s.vertex_count(); ++j) EXPECT_EQ(m.entries(i, j), counts[i][j]);
  }
}

TEST(Perron, Examples) {
  auto p = perron(Matrix{{5.0}});
  EXPECT_DOUBLE_EQ(p.rho, 5.0);
  EXPECT_DOUBLE_EQ(p.left[0], 1.0);
  EXPECT_DOUBLE_EQ(p.right[0], 1.0);

  p = perron(Matrix{{0.0, 2.0}, {3.0, 0.0}});
  EXPECT_NEAR(p.rho, std::sqrt(6.0), 1e-12);
  EXPECT_NEAR(p.rho, 2.449489742783, 1e-12);

  p = perron(Matrix{{1.0, 1.0}, {1.0, 1.0}});
  EXPECT_NEAR(p.rho, 2.0, 1e-13);
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(p.left[k], 0.5, 1e-13);
    EXPECT_NEAR(p.right[k], 0.5, 1e-13);
  }
}

TEST(Perron, PeriodicThreeCycle) {
  const auto p = perron(degree_matrix(cycle3(), 1.0));
  EXPECT_NEAR(p.rho, 2.0, 1e-12);
  for (double x : p.left) EXPECT_NEAR(x, 1.0 / 3.0, 1e-12);
}

TEST(PerronProperty, EigenResidualsAndPositivity) {
  for (const auto& s : test::random_systems()) {
    for (double t : {0.0, 0.5, 1.0, 2.0}) {
      const auto m = degree_matrix(s, t);
      const auto p = perron(m);
      EXPECT_LE(inf_norm_diff(m.entries.apply_left(p.left), p.left, p.rho), 1e-10 * p.rho);
      EXPECT_LE(inf_norm_diff(m.entries.apply(p.right), p.right, p.rho), 1e-10 * p.rho);
      double su = 0, sv = 0;
      for (std::size_t k = 0; k < p.left.size(); ++k) {
        EXPECT_GT(p.left[k], 0.0);
        EXPECT_GT(p.right[k], 0.0);
        su += p.left[k];
        sv += p.right[k];
      }
      EXPECT_NEAR(su, 1.0, 1e-12);
      EXPECT_NEAR(sv, 1.0, 1e-12);
    }
  }
}

// Primitive case: n·((1/n) log 1ᵀMⁿ1 − log ρ) → log((1ᵀv)(uᵀ1)/(uᵀv)) = −log(uᵀv) for sum-normalized u, v.
TEST(PerronProperty, GrowthOfWordSumsMatchesSpectralProjection) {
  int checked = 0;
  for (const auto& s : test::random_systems()) {
    const auto m = degree_matrix(s, 1.0);
    if (!detail::is_primitive(m.entries)) continue;
    const auto p = perron(m);
    double uv = 0.0;
    for (std::size_t k = 0; k < p.left.size(); ++k) uv += p.left[k] * p.right[k];
    const std::size_t n = 200;
    const double offset = n * (std::log(partition_deg_matrix(s, n, 1.0)) / n - std::log(p.rho));
    EXPECT_NEAR(offset, -std::log(uv), 1e-6);
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(PerronProperty, SingleVertexRatioConvergesAtForty) {
  for (const char* name : {"z2", "z3", "degrees23"}) {
    const auto s = test::sample(name);
    const double rho = perron(degree_matrix(s, 1.0)).rho;
    EXPECT_NEAR(std::pow(partition_deg_matrix(s, 40, 1.0), 1.0 / 40.0), rho, 1e-3 * rho);
  }
}

TEST(CanonicalWeights, Examples) {
  const auto s = test::sample("degrees23");
  auto w = canonical_weights(s, 1.0);
  EXPECT_NEAR(w.a[0], 0.4, 1e-13);
  EXPECT_NEAR(w.a[1], 0.6, 1e-13);
  w = canonical_weights(s, 0.0);
  EXPECT_NEAR(w.a[0], 0.5, 1e-13);
  EXPECT_NEAR(w.a[1], 0.5, 1e-13);

  const auto tv = test::sample("two_vertex");
  w = canonical_weights(tv, 1.0);
  EXPECT_NEAR(w.a[0], 1.0, 1e-12);
  EXPECT_NEAR(w.a[1], 1.0, 1e-12);
  const auto p = perron(degree_matrix(tv, 1.0));
  EXPECT_NEAR(p.left[0] / p.left[1], std::sqrt(3.0) / std::sqrt(2.0), 1e-12);
}

TEST(CanonicalWeightsProperty, VertexwiseNormalization) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> tdist(-1.0, 3.0);
  for (const auto& s : test::random_systems()) {
    for (int k = 0; k < 4; ++k) {
      const double t = tdist(rng);
      const auto w = canonical_weights(s, t);
      for (VertexId j = 0; j < s.vertex_count(); ++j) EXPECT_NEAR(sum_into(s, w, j), 1.0, 1e-10) << "t=" << t;
      for (double a : w.a) {
        EXPECT_GT(a, 0.0);
        EXPECT_LE(a, 1.0 + 1e-12);
      }
    }
  }
}

// Weights are a ratio of eigenvector entries, so rescaling u changes nothing.
TEST(CanonicalWeightsProperty, IndependentOfEigenvectorScale) {
  for (const auto& s : test::random_systems(10)) {
    const double t = 1.3;
    const auto p = perron(degree_matrix(s, t));
    const auto w = canonical_weights(s, t);
    for (double scale : {1e-3, 7.0, 1e5}) {
      for (GeneratorId g = 0; g < s.generators().size(); ++g) {
        const auto& gen = s.generator(g);
        const double a = std::pow(gen.degree, t) * (scale * p.left[gen.from]) / (p.rho * scale * p.left[gen.to]);
        EXPECT_NEAR(a, w.a[g], 1e-12);
      }
    }
  }
}

TEST(TopologicalEntropy, Examples) {
  EXPECT_NEAR(topological_entropy(test::sample("z2")), 0.6931472, 5e-8);
  EXPECT_NEAR(topological_entropy(test::sample("degrees23")), 1.6094379, 5e-8);
  EXPECT_NEAR(topological_entropy(test::sample("two_vertex")), 0.8958797, 5e-8);
  EXPECT_NEAR(topological_entropy(test::sample("two_vertex")), 0.5 * std::log(6.0), 1e-12);
}

TEST(VertexStationary, Examples) {
  const auto z2 = test::sample("z2");
  auto c = vertex_stationary(z2, canonical_weights(z2, 1.0));
  EXPECT_DOUBLE_EQ(c.c[0], 1.0);
  const auto tv = test::sample("two_vertex");
  c = vertex_stationary(tv, canonical_weights(tv, 1.0));
  EXPECT_NEAR(c.c[0], 0.5, 1e-12);
  EXPECT_NEAR(c.c[1], 0.5, 1e-12);
  const auto cyc = cycle3();
  c = vertex_stationary(cyc, canonical_weights(cyc, 1.0));
  for (double x : c.c) EXPECT_NEAR(x, 1.0 / 3.0, 1e-12);
  EXPECT_LE(c.residual, 1e-10);
}

TEST(VertexStationaryProperty, FixedPointResidual) {
  for (const auto& s : test::random_systems()) {
    const auto w = canonical_weights(s, 1.0);
    const auto c = vertex_stationary(s, w);
    EXPECT_LE(c.residual, 1e-10);
    // independent re-check of c_i = Σ_{α out of i} a_α c_{𝒕(α)}
    for (VertexId i = 0; i < s.vertex_count(); ++i) {
      double rhs = 0.0;
      for (const auto g : s.generators_out_of(i)) rhs += w.a[g] * c.c[s.generator(g).to];
      EXPECT_NEAR(c.c[i], rhs, 1e-10);
    }
  }
}

TEST(EntropyIdentity, Examples) {
  auto e = entropy_identity(test::sample("degrees23"), 1.0);
  const double hand = -0.4 * std::log(0.4) - 0.6 * std::log(0.6) + 0.4 * std::log(2.0) + 0.6 * std::log(3.0);
  EXPECT_NEAR(e.entropy, hand, 1e-12);
  EXPECT_NEAR(e.entropy, std::log(5.0), 1e-12);
  EXPECT_LE(e.residual, 1e-10);

  for (double t : {-0.5, 0.0, 1.0, 2.5}) {
    e = entropy_identity(test::sample("z2"), t);
    EXPECT_NEAR(e.entropy, std::log(2.0), 1e-13);
    EXPECT_NEAR(e.mean_log_degree, std::log(2.0), 1e-13);
    EXPECT_LE(e.residual, 1e-13);
  }

  e = entropy_identity(test::sample("two_vertex"), 1.0);
  EXPECT_NEAR(e.entropy, 0.5 * std::log(6.0), 1e-12);
  EXPECT_LE(e.residual, 1e-10);
}

TEST(EntropyIdentityProperty, ResidualOnRandomSystems) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> tdist(0.25, 2.5);
  for (const auto& s : test::random_systems())
    for (int k = 0; k < 5; ++k) EXPECT_LE(entropy_identity_residual(s, tdist(rng)), 1e-9);
}

// d/dt log ρ(M^(t)) = E(t) = mean log degree ≥ 0, so log ρ is nondecreasing; convex as a log-sum of exponentials.
TEST(LogRhoProperty, ConvexAndNondecreasingInT) {
  std::vector<GdmsSystem> systems;
  for (const char* name : {"z2", "degrees23", "two_vertex", "z4"}) systems.push_back(test::sample(name));
  std::mt19937_64 rng(41);
  for (int k = 0; k < 10; ++k) systems.push_back(test::random_system(rng, {3, 4, 4}));
  for (const auto& s : systems) {
    bool some_ge2 = false;
    for (const auto& g : s.generators()) some_ge2 = some_ge2 || g.degree >= 2;
    std::vector<double> f;
    const double h = 0.125;
    for (int k = 0; k <= 24; ++k) f.push_back(std::log(perron(degree_matrix(s, -0.5 + h * k)).rho));
    for (std::size_t k = 1; k < f.size(); ++k) {
      if (some_ge2) {
        EXPECT_GT(f[k], f[k - 1]);
      } else {
        EXPECT_NEAR(f[k], f[k - 1], 1e-12);
      }
    }
    for (std::size_t k = 1; k + 1 < f.size(); ++k) EXPECT_GE(f[k - 1] + f[k + 1] - 2 * f[k], -1e-10);
    const auto e = entropy_identity(s, 1.0);
    const double dt = 1e-4;
    const double slope = (std::log(perron(degree_matrix(s, 1 + dt)).rho) - std::log(perron(degree_matrix(s, 1 - dt)).rho)) / (2 * dt);
    EXPECT_NEAR(slope, e.mean_log_degree, 1e-6);
  }
}
