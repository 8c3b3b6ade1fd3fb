#include <doctest.h>

#include <cmath>

#include "spinlab/entropy.hpp"
#include "support/oracles.hpp"

using namespace spinlab;

namespace {

TablePtr table_of(SpinSystem sys, const Pinning& tau = {}) {
  return enumerate(std::make_shared<SpinSystem>(std::move(sys)), tau);
}

VectorXd random_positive(Index n, Rng& rng) {
  VectorXd f(n);
  for (Index i = 0; i < n; ++i) f[i] = rng.exponential() + 1e-9;
  return f;
}

BlockWeights random_block_weights_for_test(int n, Rng& rng) {
  std::vector<std::vector<int>> blocks;
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  for (int b = 0; b < 3; ++b) {
    std::vector<int> blk;
    for (int v = 0; v < n; ++v)
      if (rng.uniform() < 0.5) blk.push_back(v);
    if (blk.empty()) blk.push_back(rng.uniform_int(n));
    for (int v : blk) covered[static_cast<std::size_t>(v)] = 1;
    blocks.push_back(std::move(blk));
  }
  for (int v = 0; v < n; ++v)
    if (!covered[static_cast<std::size_t>(v)]) blocks.push_back({v});
  VectorXd probs(Index(blocks.size()));
  for (Index b = 0; b < probs.size(); ++b) probs[b] = rng.exponential() + 0.1;
  probs /= probs.sum();
  return BlockWeights::make(std::move(blocks), std::move(probs), n);
}

}  // namespace

TEST_CASE("entropy functional") {
  TablePtr t = table_of(build_potts(Graph::cycle(4), 3, 0.3));
  SUBCASE("constants carry no entropy") {
    CHECK(entropy(*t, VectorXd::Constant(t->size(), 2.3)) == doctest::Approx(0.0).epsilon(1e-14));
  }
  SUBCASE("normalized indicators give log(1/mu(A))") {
    VectorXd f = VectorXd::Zero(t->size());
    double mass = 0;
    for (Index i = 0; i < 10; ++i) mass += t->probs[i];
    for (Index i = 0; i < 10; ++i) f[i] = 1.0 / mass;
    CHECK(entropy(*t, f) == doctest::Approx(std::log(1 / mass)).epsilon(1e-12));
  }
  SUBCASE("degree-one homogeneity") {
    Rng rng(3);
    VectorXd f = random_positive(t->size(), rng);
    CHECK(entropy(*t, VectorXd(3.7 * f)) == doctest::Approx(3.7 * entropy(*t, f)).epsilon(1e-12));
  }
  SUBCASE("zero mean is rejected") {
    CHECK_THROWS(entropy(*t, VectorXd::Zero(t->size())));
  }
}

TEST_CASE("conditional entropy identities") {
  TablePtr t = table_of(build_ising(Graph::cycle(4), 0.35, 0.1));
  Rng rng(7);
  VectorXd f = random_positive(t->size(), rng);
  SUBCASE("full block recovers the entropy") {
    CHECK(conditional_entropy_avg(t.operator*(), {0, 1, 2, 3}, f) ==
          doctest::Approx(entropy(*t, f)).epsilon(1e-12));
  }
  SUBCASE("empty block carries nothing") {
    CHECK(conditional_entropy_avg(*t, std::vector<int>{}, f) == doctest::Approx(0.0).epsilon(1e-13));
  }
  SUBCASE("decomposition") {
    for (std::vector<int> lambda : {std::vector<int>{0}, {1, 3}, {0, 1, 2}}) {
      double lhs = entropy(*t, f);
      double rhs = conditional_entropy_avg(*t, lambda, f) +
                   entropy(*t, conditional_expectation(*t, lambda, f));
      CHECK(std::abs(lhs - rhs) <= 1e-10);
    }
  }
}

TEST_CASE("dirichlet forms") {
  TablePtr t = table_of(build_ising(Graph::cycle(4), 0.3, 0.0));
  Kernel k = glauber(t);
  Rng rng(11);
  VectorXd f = random_positive(t->size(), rng);
  VectorXd g = random_positive(t->size(), rng);
  SUBCASE("constants are harmonic") {
    CHECK(dirichlet_form(k, VectorXd::Ones(t->size()), VectorXd::Ones(t->size())) ==
          doctest::Approx(0.0).epsilon(1e-13));
  }
  SUBCASE("quadratic form is nonnegative") {
    CHECK(dirichlet_form(k, f, f) >= -1e-12);
  }
  SUBCASE("reversible sum form agrees") {
    CHECK(dirichlet_form(k, f, g) == doctest::Approx(dirichlet_form_sum(k, f, g)).epsilon(1e-11));
  }
  SUBCASE("block kernels decompose into covariance mixtures") {
    Rng arng(5);
    BlockWeights alpha = BlockWeights::make({{0, 1}, {2, 3}, {0, 3}},
                                            (VectorXd(3) << 0.2, 0.5, 0.3).finished(), 4);
    Kernel bd = block_dynamics(t, alpha);
    CHECK(dirichlet_form(bd, f, g) ==
          doctest::Approx(block_covariance_form(*t, alpha, f, g)).epsilon(1e-11));
  }
}

TEST_CASE("factorization constants") {
  SUBCASE("product measures tensorize with constant one") {
    TablePtr t = table_of(build_potts(Graph::from_edges(3, {}), 3, 0.0));
    auto fs = random_test_functions(t->size(), 400, Rng(2));
    FactorizationReport at = measure_factorization(*t, Functional::at(), fs, 200, Rng(3));
    CHECK(at.measured_C_lower <= 1.0 + 1e-9);
    CHECK(at.measured_C_lower >= 0.6);  // random batch approaches it from below
    // Shearer for arbitrary weights on a product measure
    Rng arng(5);
    BlockWeights alpha = random_block_weights_for_test(3, arng);
    FactorizationReport gbf = measure_factorization(*t, Functional::gbf(alpha), fs, 200, Rng(7));
    CHECK(gbf.measured_C_lower <= 1.0 + 1e-9);
  }
  SUBCASE("interacting triangle has a finite constant above one") {
    TablePtr t = table_of(build_ising(Graph::complete(3), 0.2, 0.0));
    auto fs = random_test_functions(t->size(), 400, Rng(21));
    FactorizationReport at = measure_factorization(*t, Functional::at(), fs, 200, Rng(22));
    CHECK(at.measured_C_lower > 1.0);
    CHECK(at.measured_C_lower < 50.0);
    CHECK(at.witness_lhs <= at.measured_C_lower * at.witness_rhs + 1e-10);
  }
  SUBCASE("UBF with l = n is exact") {
    TablePtr t = table_of(build_ising(Graph::path(3), 0.2, 0.0));
    auto fs = random_test_functions(t->size(), 100, Rng(31));
    FactorizationReport ubf = measure_factorization(*t, Functional::ubf(3), fs, 0, Rng(32));
    CHECK(ubf.measured_C_lower == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("brascamp-lieb") {
  SUBCASE("unit functions are tight") {
    TablePtr t = table_of(build_ising(Graph::path(3), 0.3, 0.0));
    BrascampLiebResult r = brascamp_lieb_check(*t, 1.5, MatrixXd::Ones(3, 2));
    CHECK(r.lhs == doctest::Approx(1.0));
    CHECK(r.rhs == doctest::Approx(1.0));
    CHECK(r.holds);
  }
  SUBCASE("product measure with C = 1 factorizes") {
    TablePtr t = table_of(build_potts(Graph::from_edges(3, {}), 3, 0.0));
    Rng rng(17);
    for (int rep = 0; rep < 100; ++rep) {
      MatrixXd phis(3, 3);
      for (Index i = 0; i < 9; ++i) phis(i / 3, i % 3) = std::exp(0.5 * rng.gaussian());
      BrascampLiebResult r = brascamp_lieb_check(*t, 1.0, phis);
      CHECK(r.lhs <= r.rhs + 1e-10);
    }
  }
  SUBCASE("measured subadditivity constant works on an interacting triangle") {
    TablePtr t = table_of(build_ising(Graph::complete(3), 0.25, 0.0));
    auto fs = random_test_functions(t->size(), 400, Rng(41));
    // the constant must dominate the ratios of the tested product densities
    Rng rng(43);
    std::vector<MatrixXd> phi_batch;
    for (int rep = 0; rep < 300; ++rep) {
      MatrixXd phis(3, 2);
      for (Index i = 0; i < 6; ++i) phis(i / 2, i % 2) = std::exp(0.8 * rng.gaussian());
      VectorXd prod(t->size());
      for (Index i = 0; i < t->size(); ++i) {
        double w = 1;
        for (int v = 0; v < 3; ++v) w *= phis(v, t->states[static_cast<std::size_t>(i)][v]);
        prod[i] = w;
      }
      fs.push_back(std::move(prod));
      phi_batch.push_back(std::move(phis));
    }
    FactorizationReport sub = measure_factorization(*t, Functional::subadd(), fs, 200, Rng(42));
    double C = std::max(sub.measured_C_lower, 1.0);
    for (const MatrixXd& phis : phi_batch) {
      BrascampLiebResult r = brascamp_lieb_check(*t, C, phis);
      CHECK(r.lhs <= r.rhs + 1e-9);
    }
  }
}

TEST_CASE("entropy decay rate") {
  SUBCASE("one-step equilibration has rate one") {
    TablePtr t = table_of(build_ising(Graph::path(2), 0.2, 0.0));
    Kernel k = block_dynamics(t, BlockWeights::single_block(2));
    CHECK(entropy_decay_rate(k, Rng(1)).delta == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("the identity chain never decays") {
    TablePtr t = table_of(build_ising(Graph::path(2), 0.2, 0.0));
    Kernel k;
    k.space = t;
    k.P = MatrixXd::Identity(t->size(), t->size());
    CHECK(entropy_decay_rate(k, Rng(1)).delta == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("distribution-side and function-side optimizations agree") {
    TablePtr t = table_of(build_ising(Graph::path(2), 0.0, 0.0));
    Kernel k = glauber(t);
    DecayRateResult dr = entropy_decay_rate(k, Rng(5), 48, 800);
    // function side: maximize Ent(Pf)/Ent(f) by multiplicative hill climbing
    Rng rng(6);
    double best = 0;
    for (int start = 0; start < 40; ++start) {
      VectorXd f = random_positive(t->size(), rng);
      double cur = 0;
      double step = 0.5;
      for (int it = 0; it < 3000; ++it) {
        double e0 = entropy(*t, f);
        double ratio = e0 > 1e-13 ? entropy(*t, VectorXd(k.P * f)) / e0 : 0;
        if (ratio > cur) cur = ratio;
        Index i = rng.uniform_int(int(f.size()));
        double old = f[i];
        f[i] *= rng.uniform() < 0.5 ? (1 + step) : 1 / (1 + step);
        double e1 = entropy(*t, f);
        double r1 = e1 > 1e-13 ? entropy(*t, VectorXd(k.P * f)) / e1 : 0;
        if (r1 < cur) {
          f[i] = old;
          step = std::max(0.02, step * 0.995);
        }
      }
      best = std::max(best, cur);
    }
    CHECK(std::abs((1 - dr.delta) - best) <= 1e-4);
  }
}

TEST_CASE("mlsi and lsi checks") {
  TablePtr t = table_of(build_ising(Graph::cycle(4), 0.25, 0.0));
  Kernel k = glauber(t);
  auto fs = random_test_functions(t->size(), 400, Rng(12), TestFunctionStyle::positive);
  SUBCASE("rho = 0 always passes") {
    CHECK(mlsi_check(k, 0.0, fs).pass);
  }
  SUBCASE("the certified decay rate is an MLSI constant") {
    DecayRateResult dr = entropy_decay_rate(k, Rng(13));
    MlsiResult ml = mlsi_check(k, dr.delta, fs, 1e-6);
    CHECK(ml.pass);
  }
  SUBCASE("dirichlet comparison behind LSI implies MLSI with twice the constant") {
    Rng rng(14);
    for (int rep = 0; rep < 200; ++rep) {
      VectorXd f = random_positive(t->size(), rng);
      VectorXd logf = f.array().log();
      VectorXd sq = f.cwiseSqrt();
      CHECK(dirichlet_form(k, f, logf) + 1e-11 >= 4 * dirichlet_form(k, sq, sq));
    }
  }
}

TEST_CASE("exact mixing time") {
  SUBCASE("one-step chains mix immediately") {
    TablePtr t = table_of(build_ising(Graph::path(2), 0.3, 0.0));
    Kernel k = block_dynamics(t, BlockWeights::single_block(2));
    MixingResult mr = exact_mixing_time(k, 1.0);
    CHECK(mr.t_mix == 1);
    CHECK(mr.bound == doctest::Approx(1 + std::log(8.0) +
                                      std::log(std::log(1 / t->probs.minCoeff()))).epsilon(1e-12));
    CHECK(mr.bound_holds);
  }
  SUBCASE("glauber mixing on a path matches an independent power loop") {
    TablePtr t = table_of(build_ising(Graph::path(4), 0.2, 0.0));
    Kernel k = glauber(t);
    MixingResult mr = exact_mixing_time(k);
    // oracle: evolve each start distribution separately
    Index expect = -1;
    for (Index steps = 1; steps < 4000 && expect < 0; ++steps) {
      double worst = 0;
      for (Index s = 0; s < t->size(); ++s) {
        VectorXd row = VectorXd::Zero(t->size());
        row[s] = 1;
        for (Index it = 0; it < steps; ++it) row = k.P.transpose() * row;
        worst = std::max(worst, tv_distance(row, t->probs));
      }
      if (worst <= 0.25) expect = steps;
    }
    CHECK(mr.t_mix == expect);
  }
}

TEST_CASE("recursion quantities") {
  SUBCASE("product measures satisfy the local inequality with margin one") {
    TablePtr t = table_of(build_potts(Graph::from_edges(3, {}), 3, 0.0));
    auto fs = random_test_functions(t->size(), 100, Rng(3));
    RecursionReport rep = recursion_quantities(*t, 0.0, 1.0 / 3, fs);
    CHECK(rep.local_min_margin >= -1e-10);
    for (double a : rep.alpha_measured)
      if (std::isfinite(a)) CHECK(a >= 1.0 - 1e-9);
    CHECK(rep.global_c_min_margin >= -1e-9);
  }
  SUBCASE("ising triangle with exhaustive inputs") {
    TablePtr t = table_of(build_ising(Graph::complete(3), 0.2, 0.0));
    SpectralIndependence si = spectral_independence(*t);
    MarginalBoundResult mb = marginal_bound(*t);
    auto fs = random_test_functions(t->size(), 300, Rng(4));
    RecursionReport rep = recursion_quantities(*t, si.eta, mb.b, fs);
    CHECK(rep.local_min_margin >= -1e-9);
    CHECK(rep.global_c_min_margin >= -1e-9);
    CHECK(rep.global_kappa_min_margin >= -1e-9);
    CHECK(rep.kappa_fallingfactorial_min_margin >= -1e-9);
    CHECK(rep.R == int(std::ceil(2 * si.eta / mb.b)));
  }
}

TEST_CASE("pinsker variance bound") {
  SUBCASE("constants are degenerate") {
    TablePtr t = table_of(build_ising(Graph::path(2), 0.3, 0.0));
    PinskerResult pr = pinsker_variance_bound(*t, 0, VectorXd::Ones(t->size()), 0.25);
    CHECK(pr.var == doctest::Approx(0.0));
    CHECK(pr.ent == doctest::Approx(0.0));
    CHECK(pr.holds);
  }
  SUBCASE("a fair two-point marginal with b = 1/2") {
    TablePtr t = table_of(build_ising(Graph::from_edges(1, {}), 0.0, 0.0));
    Rng rng(8);
    for (int rep = 0; rep < 200; ++rep) {
      VectorXd f = random_positive(t->size(), rng);
      CHECK(pinsker_variance_bound(*t, 0, f, 0.5).holds);
    }
  }
  SUBCASE("random functions on an interacting instance") {
    TablePtr t = table_of(build_potts(Graph::cycle(4), 3, 0.4));
    MarginalBoundResult mb = marginal_bound(*t);
    Rng rng(9);
    for (int rep = 0; rep < 500; ++rep) {
      VectorXd f = random_positive(t->size(), rng);
      int x = int(rep) % 4;
      CHECK(pinsker_variance_bound(*t, x, f, mb.b).margin >= -1e-10);
    }
  }
}

TEST_CASE("spectral gap never exceeds the coverage probability") {
  TablePtr t = table_of(build_ising(Graph::cycle(4), 0.3, 0.0));
  Rng rng(10);
  for (int rep = 0; rep < 5; ++rep) {
    BlockWeights alpha = random_block_weights_for_test(4, rng);
    Kernel k = block_dynamics(t, alpha);
    CHECK(spectral_gap(k) <= coverage_delta(alpha, 4) + 1e-9);
  }
  Kernel g = glauber(t);
  CHECK(spectral_gap(g) <= 0.25 + 1e-9);
}
