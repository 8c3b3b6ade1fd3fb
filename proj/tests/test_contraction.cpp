#include <doctest.h>

#include <cmath>

#include "spinlab/contraction.hpp"
#include "support/oracles.hpp"

using namespace spinlab;

namespace {

TablePtr table_of(SpinSystem sys, const Pinning& tau = {}) {
  return enumerate(std::make_shared<SpinSystem>(std::move(sys)), tau);
}

Kernel identity_kernel(const TablePtr& t) {
  Kernel k;
  k.space = t;
  k.P = MatrixXd::Identity(t->size(), t->size());
  k.meta.name = "identity";
  return k;
}

}  // namespace

TEST_CASE("kappa measurement") {
  Metric dh = Metric::hamming();
  SUBCASE("one-step equilibration contracts everything to zero") {
    TablePtr t = table_of(build_ising(Graph::path(3), 0.2, 0.0));
    Kernel k = block_dynamics(t, BlockWeights::single_block(3));
    CHECK(measure_kappa(k, dh).kappa == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("the identity chain does not contract") {
    TablePtr t = table_of(build_ising(Graph::path(3), 0.2, 0.0));
    CHECK(measure_kappa(identity_kernel(t), dh).kappa == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("free glauber contracts at exactly 1 - 1/n") {
    for (int n : {2, 3, 4}) {
      TablePtr t = table_of(build_ising(Graph::path(n), 0.0, 0.0));
      Kernel k = glauber(t);
      ContractionReport rep = measure_kappa(k, dh, PairMode::all_pairs);
      CHECK(rep.kappa == doctest::Approx(1.0 - 1.0 / n).epsilon(1e-9));
      // path coupling surrogate agrees for a path metric
      ContractionReport adj = measure_kappa(k, dh, PairMode::adjacent_pairs);
      CHECK(adj.kappa == doctest::Approx(rep.kappa).epsilon(1e-9));
    }
  }
  SUBCASE("pinning sweep reports the worst pinning") {
    TablePtr t = table_of(build_ising(Graph::cycle(4), 0.3, 0.0));
    KernelBuilder build = [](const TablePtr& tt) { return glauber(tt); };
    ContractionReport rep = measure_kappa_sweep(*t, build, dh, PairMode::all_pairs);
    CHECK(rep.kappa < 1.0);
    CHECK(rep.per_pinning.size() > 1);
    for (auto& [tau, kap] : rep.per_pinning) CHECK(kap <= rep.kappa + 1e-15);
  }
}

TEST_CASE("predicted eta formulas") {
  int n = 10;
  double eps = 0.4;
  double kappa = 1 - eps / n;
  CHECK(predicted_eta(EtaBoundKind::glauber_weighted, kappa, n) == doctest::Approx(2 / eps));
  CHECK(predicted_eta(EtaBoundKind::glauber_gamma, kappa, n, 2.0) == doctest::Approx(8 / eps));
  double phi = 0.3 * 6;  // D*M
  CHECK(predicted_eta(EtaBoundKind::general, 0.25, n, 2.0, phi) ==
        doctest::Approx(2 * 4 * phi / 0.75));
  CHECK_THROWS(predicted_eta(EtaBoundKind::glauber_weighted, 1.0, n));
}

TEST_CASE("contraction implies spectral independence on small instances") {
  // the full theorem chain, exercised end to end on one instance per metric type
  TablePtr t = table_of(build_ising(Graph::cycle(4), 0.3, 0.0));
  SpectralIndependence si = spectral_independence(*t);
  KernelBuilder build = [](const TablePtr& tt) { return glauber(tt); };
  SUBCASE("hamming") {
    ContractionReport rep = measure_kappa_sweep(*t, build, Metric::hamming(), PairMode::all_pairs);
    REQUIRE(rep.kappa < 1.0);
    CHECK(si.eta <= predicted_eta(EtaBoundKind::glauber_weighted, rep.kappa, 4) + 1e-8);
  }
  SUBCASE("weighted hamming") {
    VectorXd w(4);
    w << 1.3, 0.8, 1.1, 0.7;
    ContractionReport rep = measure_kappa_sweep(*t, build, Metric::weighted(w), PairMode::all_pairs);
    REQUIRE(rep.kappa < 1.0);
    CHECK(si.eta <= predicted_eta(EtaBoundKind::glauber_weighted, rep.kappa, 4) + 1e-8);
  }
  SUBCASE("gamma-equivalent") {
    // a tight draw spread keeps the chain contractive under the skewed metric
    Metric m = Metric::random_gamma_equivalent(*t, 1.5, Rng(21), 1.05);
    ContractionReport rep = measure_kappa_sweep(*t, build, m, PairMode::all_pairs);
    REQUIRE(rep.kappa < 1.0);
    CHECK(si.eta <= predicted_eta(EtaBoundKind::glauber_gamma, rep.kappa, 4, 1.5) + 1e-8);
  }
}

TEST_CASE("phi locality") {
  SUBCASE("glauber families are 1/n local") {
    TablePtr t = table_of(build_potts(Graph::cycle(4), 3, 0.25));
    KernelBuilder build = [](const TablePtr& tt) { return glauber(tt); };
    for (int a = 0; a < 3; ++a) {
      LocalityReport rep = measure_locality_phi(*t, build, {}, 0, a);
      CHECK(rep.phi <= 0.25 + 1e-12);
    }
  }
  SUBCASE("select-update families are DM local") {
    TablePtr t = table_of(build_colorings(Graph::cycle(4), 4));
    FlipParams fp = FlipParams::load(std::string(SPINLAB_SOURCE_DIR) + "/configs/flip_params.json");
    KernelBuilder build = [fp](const TablePtr& tt) { return flip_dynamics(tt, fp); };
    Kernel base = flip_dynamics(t, fp);
    double dm = base.meta.max_block_size * base.meta.max_selection_prob;
    double phi = 0;
    for (int a = 0; a < 2; ++a)
      phi = std::max(phi, measure_locality_phi(*t, build, {}, 1, a).phi);
    CHECK(phi <= dm + 1e-10);
  }
  SUBCASE("a chain that never reads or writes a vertex has zero discrepancy") {
    // vertex 2 isolated; singleton heat-bath updates on {0,1} only
    TablePtr t = table_of(build_ising(Graph::from_edges(3, {{0, 1}}), 0.4, 0.0));
    KernelBuilder build = [](const TablePtr& tt) {
      SelectUpdate su;
      su.blocks = {{0}, {1}};
      su.selector = [](Index) { return VectorXd::Constant(2, 0.5); };
      TablePtr local = tt;
      su.updater = [local](Index state, int b) {
        return heat_bath_update_row(*local, {b}, state);
      };
      return select_update(tt, su);
    };
    LocalityReport rep = measure_locality_phi(*t, build, {}, 2, 0);
    CHECK(rep.phi == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("stein comparison bound") {
  TablePtr t = table_of(build_ising(Graph::complete(3), 0.2, 0.0));
  Metric dh = Metric::hamming();
  Kernel P = glauber(t);
  double kappa = measure_kappa(P, dh).kappa;
  REQUIRE(kappa < 1.0);
  SUBCASE("identical chains have zero gap") {
    VectorXd f(t->size());
    Rng rng(6);
    for (Index i = 0; i < f.size(); ++i) f[i] = rng.gaussian();
    SteinReport sr = verify_stein_bound(P, P, dh, f, kappa);
    CHECK(sr.lhs == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sr.expected_w1 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sr.holds);
  }
  SUBCASE("constant functions have zero lhs") {
    TablePtr rt = restrict_table(t, Pinning::single(0, 0));
    Kernel Q = glauber(rt);
    SteinReport sr = verify_stein_bound(P, Q, dh, VectorXd::Constant(t->size(), 2.0), kappa);
    CHECK(sr.lhs == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sr.lipschitz == 0.0);
    CHECK(sr.holds);
  }
  SUBCASE("the sign function realizes the influence sum") {
    InfluenceMatrix J = influence_matrix(*t);
    InfluenceSums sums = sum_absolute_influence(J);
    for (std::size_t idx = 0; idx < J.index.size(); ++idx) {
      auto [x, a] = J.index[idx];
      TablePtr rt = restrict_table(t, Pinning::single(x, a));
      Kernel Q = glauber(rt);
      VectorXd f = influence_sign_function(J, x, a, *t);
      CHECK(lipschitz_constant(dh, *t, f) <= 2.0 + 1e-12);
      SteinReport sr = verify_stein_bound(P, Q, dh, f, kappa);
      CHECK(sr.lhs == doctest::Approx(sums.s[idx]).epsilon(1e-10));
      CHECK(sr.holds);
    }
  }
  SUBCASE("random functions satisfy the bound") {
    Rng rng(14);
    for (int rep = 0; rep < 50; ++rep) {
      auto [x, a] = influence_matrix(*t).index[static_cast<std::size_t>(rep) % 6];
      TablePtr rt = restrict_table(t, Pinning::single(x, a));
      Kernel Q = glauber(rt);
      VectorXd f(t->size());
      for (Index i = 0; i < f.size(); ++i) f[i] = 3 * rng.gaussian();
      SteinReport sr = verify_stein_bound(P, Q, dh, f, kappa);
      CHECK(sr.lhs <= sr.rhs + 1e-9);
    }
  }
}

TEST_CASE("dobrushin contraction weights") {
  SUBCASE("zero matrix accepts uniform weights") {
    auto cw = dobrushin_contraction_weights(MatrixXd::Zero(3, 3), 0.5);
    REQUIRE(cw.has_value());
    CHECK((cw->w.array() > 0).all());
  }
  SUBCASE("symmetric matrix with rho 0.8") {
    MatrixXd R(3, 3);
    R << 0, 0.4, 0.4, 0.4, 0, 0.4, 0.4, 0.4, 0;
    double rho = spectral_radius(R).rho;
    CHECK(rho == doctest::Approx(0.8).epsilon(1e-9));
    auto cw = dobrushin_contraction_weights(R, 0.199999);
    REQUIRE(cw.has_value());
    CHECK(((0.800001 * cw->w - R * cw->w).array() >= 0).all());
  }
  SUBCASE("rho = 1 rejects every positive eps") {
    MatrixXd R(2, 2);
    R << 0, 1, 1, 0;
    CHECK(!dobrushin_contraction_weights(R, 0.05).has_value());
  }
}

TEST_CASE("absolute influence sums") {
  SUBCASE("independent spins have zero influence everywhere") {
    TablePtr t = table_of(build_potts(Graph::complete(3), 3, 0.0));
    InfluenceSums sums = sum_absolute_influence(influence_matrix(*t));
    CHECK(sums.max_s <= 1e-13);
  }
  SUBCASE("lambda1 never exceeds the worst row sum") {
    for (TablePtr t : {table_of(build_ising(Graph::cycle(5), 0.35, 0.1)),
                       table_of(build_colorings(Graph::cycle(4), 4)),
                       table_of(build_hardcore(Graph::path(4), 1.4))}) {
      InfluenceMatrix J = influence_matrix(*t);
      InfluenceSums sums = sum_absolute_influence(J);
      CHECK(sums.lambda1_dominated);
      CHECK(sums.lambda1_value <= sums.max_s + 1e-10);
    }
  }
  SUBCASE("unit weights reproduce the unweighted sums") {
    TablePtr t = table_of(build_ising(Graph::cycle(4), 0.3, 0.0));
    InfluenceMatrix J = influence_matrix(*t);
    InfluenceSums plain = sum_absolute_influence(J);
    InfluenceSums unit = sum_absolute_influence(J, VectorXd::Ones(4));
    for (std::size_t i = 0; i < plain.s.size(); ++i)
      CHECK(plain.s[i] == doctest::Approx(unit.s[i]).epsilon(1e-14));
  }
}

TEST_CASE("dobrushin weights certify contraction for all pinnings") {
  SpinSystem sys = build_ising(Graph::cycle(4), 0.25, 0.0);
  TablePtr t = table_of(sys);
  MatrixXd R = dobrushin_matrix(sys);
  double eps = 1 - spectral_radius(R).rho;
  REQUIRE(eps > 0);
  auto cw = dobrushin_contraction_weights(R, eps * 0.999);
  REQUIRE(cw.has_value());
  KernelBuilder build = [](const TablePtr& tt) { return glauber(tt); };
  ContractionReport rep =
      measure_kappa_sweep(*t, build, Metric::weighted(cw->w), PairMode::all_pairs);
  CHECK(rep.kappa <= 1 - (eps * 0.999) / 4 + 1e-10);
}
