#include <doctest.h>

#include <cmath>

#include "spinlab/edwards_sokal.hpp"
#include "spinlab/entropy.hpp"
#include "support/oracles.hpp"

using namespace spinlab;

namespace {

TablePtr table_of(SpinSystem sys) { return enumerate(std::make_shared<SpinSystem>(std::move(sys))); }

}  // namespace

TEST_CASE("joint enumeration") {
  SUBCASE("single edge q=2: six compatible pairs") {
    TablePtr t = table_of(build_ising(Graph::path(2), 0.5, 0.0));
    JointTable joint = enumerate_joint(t);
    CHECK(joint.size() == 6);  // 2 monochromatic states x {0,1} + 2 others x {0}
    CHECK(std::abs(joint.probs.sum() - 1.0) <= 1e-12);
    CHECK(joint.p == doctest::Approx(1 - std::exp(-0.5)));
  }
  SUBCASE("beta = 0 keeps no edges") {
    TablePtr t = table_of(build_potts(Graph::cycle(4), 3, 0.0));
    JointTable joint = enumerate_joint(t);
    for (const JointState& s : joint.states) CHECK(s.edge_set == 0);
    CHECK(joint.size() == t->size());
  }
  SUBCASE("spin marginal is the potts distribution, partitions agree") {
    TablePtr t = table_of(build_potts(Graph::complete(3), 3, 0.45));
    JointTable joint = enumerate_joint(t);
    CHECK((joint_spin_marginal(joint) - t->probs).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(std::abs(joint.log_partition - t->log_partition) <= 1e-11);
  }
  SUBCASE("edge marginal matches the cluster-weight law") {
    TablePtr t = table_of(build_ising(Graph::cycle(4), 0.6, 0.0));
    JointTable joint = enumerate_joint(t);
    VectorXd em = joint_edge_marginal(joint);
    VectorXd rc(em.size());
    for (Index A = 0; A < rc.size(); ++A) {
      int ka = __builtin_popcount(std::uint32_t(A));
      rc[A] = std::pow(2.0, component_count(t->sys->graph, std::uint32_t(A))) *
              std::pow(joint.p, ka) * std::pow(1 - joint.p, joint.num_edges - ka);
    }
    rc /= rc.sum();
    CHECK((em - rc).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("two-step composition equals the directly enumerated chain") {
  for (TablePtr t : {table_of(build_ising(Graph::cycle(4), 0.4, 0.0)),
                     table_of(build_potts(Graph::complete(3), 3, 0.3)),
                     table_of(build_potts(Graph::path(4), 2, 0.7))}) {
    MatrixXd composed = sw_step_composition(enumerate_joint(t));
    MatrixXd direct = oracle::direct_sw_matrix(*t);
    CHECK((composed - direct).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("joint entropies against hand sums") {
  TablePtr t = table_of(build_ising(Graph::path(3), 0.35, 0.0));
  JointTable joint = enumerate_joint(t);
  Rng rng(9);
  VectorXd f(joint.size());
  for (Index i = 0; i < f.size(); ++i) f[i] = rng.exponential();
  // decomposition through the spin coordinate
  double ent = joint_entropy(joint, f);
  double given_spin = joint_avg_entropy_given_spin(joint, f);
  VectorXd proj = joint_spin_projection(joint, f);
  double outer = entropy(*t, proj);
  CHECK(std::abs(ent - given_spin - outer) <= 1e-11);
  // conditioning can only lower the remaining entropy
  CHECK(joint_avg_entropy_given_edges(joint, f) <= ent + 1e-12);
}

TEST_CASE("spin-edge factorization report") {
  TablePtr t = table_of(build_ising(Graph::cycle(4), 0.4, 0.0));
  JointTable joint = enumerate_joint(t);
  SUBCASE("spin-measurable functions are covered by the edge term alone") {
    VectorXd f(joint.size());
    for (Index i = 0; i < f.size(); ++i)
      f[i] = 0.25 + double(joint.states[static_cast<std::size_t>(i)].spin % 5);
    CHECK(joint_avg_entropy_given_spin(joint, f) == doctest::Approx(0.0).epsilon(1e-13));
    SpinEdgeFactorization rep = spin_edge_factorization(joint, {f});
    CHECK(rep.used == 1);
    CHECK(rep.C_lower > 0);
  }
  SUBCASE("constants are skipped") {
    SpinEdgeFactorization rep = spin_edge_factorization(joint, {VectorXd::Ones(joint.size())});
    CHECK(rep.used == 0);
    CHECK(rep.skipped == 1);
  }
  SUBCASE("random batch gives a usable constant") {
    auto fs = random_test_functions(joint.size(), 100, Rng(4));
    SpinEdgeFactorization rep = spin_edge_factorization(joint, fs);
    CHECK(rep.C_lower >= 1.0 - 1e-9);  // conditioning on both coordinates wins
    CHECK(rep.witness_lhs <= rep.C_lower * rep.witness_rhs + 1e-10);
  }
}

TEST_CASE("k-partite joint lemmas") {
  TablePtr t = table_of(build_potts(Graph::cycle(4), 3, 0.35));
  JointTable joint = enumerate_joint(t);
  Partition part = greedy_partition(t->sys->graph);
  auto fs = random_test_functions(joint.size(), 200, Rng(11));
  KPartiteJointReport rep = kpartite_joint_checks(joint, part, fs);
  CHECK(rep.used > 0);
  CHECK(rep.lemma_mono_min_margin >= -1e-10);
  CHECK(rep.delta1_hat > 0);
  CHECK(rep.delta2_hat > 0);
  CHECK(rep.composed_min_margin >= -1e-9);
}

TEST_CASE("beta = 0 classes decouple") {
  TablePtr t = table_of(build_potts(Graph::cycle(4), 3, 0.0));
  JointTable joint = enumerate_joint(t);
  Partition part = greedy_partition(t->sys->graph);
  auto fs = random_test_functions(joint.size(), 100, Rng(13));
  KPartiteJointReport rep = kpartite_joint_checks(joint, part, fs);
  // independence across classes: the class sum recovers the full entropy
  CHECK(rep.delta2_hat >= 1.0 - 1e-9);
}
