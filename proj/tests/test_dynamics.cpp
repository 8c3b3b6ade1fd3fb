#include <doctest.h>

#include <cmath>

#include "spinlab/dynamics.hpp"
#include "support/oracles.hpp"

using namespace spinlab;

namespace {

TablePtr table_of(SpinSystem sys, const Pinning& tau = {}) {
  return enumerate(std::make_shared<SpinSystem>(std::move(sys)), tau);
}

}  // namespace

TEST_CASE("coverage delta") {
  CHECK(coverage_delta(BlockWeights::uniform_singletons(5), 5) == doctest::Approx(0.2));
  CHECK(coverage_delta(BlockWeights::single_block(4), 4) == doctest::Approx(1.0));
  // uniform over all ell-subsets covers each vertex with probability ell/n
  for (int ell : {1, 2, 3}) {
    BlockWeights bw = BlockWeights::uniform_subsets(5, ell);
    double direct = 0;  // direct summation over blocks containing vertex 0
    for (std::size_t b = 0; b < bw.blocks.size(); ++b)
      if (std::find(bw.blocks[b].begin(), bw.blocks[b].end(), 0) != bw.blocks[b].end())
        direct += bw.probs[Index(b)];
    CHECK(coverage_delta(bw, 5) == doctest::Approx(double(ell) / 5).epsilon(1e-12));
    CHECK(direct == doctest::Approx(double(ell) / 5).epsilon(1e-12));
  }
  BlockWeights partial = BlockWeights::make({{0}, {1}}, VectorXd::Constant(2, 0.5), 3);
  CHECK(!partial.covers_all);
  CHECK(coverage_delta(partial, 3) == 0.0);
}

TEST_CASE("glauber kernel") {
  SUBCASE("single free vertex equilibrates in one step") {
    TablePtr t = table_of(build_ising(Graph::from_edges(1, {}), 0.0, 0.3));
    Kernel k = glauber(t);
    for (Index i = 0; i < k.size(); ++i)
      CHECK((k.P.row(i).transpose() - t->probs).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("free chain moves single sites with probability 1/(2n)") {
    TablePtr t = table_of(build_ising(Graph::path(3), 0.0, 0.0));
    Kernel k = glauber(t);
    for (Index i = 0; i < k.size(); ++i)
      for (Index j = 0; j < k.size(); ++j)
        if (hamming(t->states[static_cast<std::size_t>(i)], t->states[static_cast<std::size_t>(j)]) == 1)
          CHECK(k.P(i, j) == doctest::Approx(1.0 / 6).epsilon(1e-13));
  }
  SUBCASE("checks pass on a pinned chain and pinned picks are lazy") {
    TablePtr t = table_of(build_potts(Graph::cycle(4), 3, 0.3), Pinning::single(1, 2));
    Kernel k = glauber(t);
    KernelChecks c = kernel_checks(k);
    CHECK(c.row_sum_error <= 1e-12);
    CHECK(c.stationarity_tv <= 1e-12);
    CHECK(c.reversibility_error <= 1e-12);
    // diagonal holds at least the lazy mass 1/n from selecting the pinned vertex
    for (Index i = 0; i < k.size(); ++i) CHECK(k.P(i, i) >= 0.25 - 1e-13);
  }
  SUBCASE("unpinned-only variant removes the lazy mass") {
    TablePtr t = table_of(build_ising(Graph::path(2), 0.0, 0.0), Pinning::single(0, 0));
    Kernel lazy = glauber(t);
    Kernel fast = glauber_unpinned_only(t);
    CHECK(fast.P(0, 0) == doctest::Approx(0.5));
    CHECK(lazy.P(0, 0) == doctest::Approx(0.75));
    CHECK(kernel_checks(fast).stationarity_tv <= 1e-12);
  }
}

TEST_CASE("block dynamics") {
  TablePtr t = table_of(build_ising(Graph::cycle(4), 0.25, 0.0));
  SUBCASE("a single full block equilibrates in one step") {
    Kernel k = block_dynamics(t, BlockWeights::single_block(4));
    for (Index i = 0; i < k.size(); ++i)
      CHECK((k.P.row(i).transpose() - t->probs).cwiseAbs().maxCoeff() <= 1e-13);
  }
  SUBCASE("uniform singletons equal the single-site chain exactly") {
    Kernel g = glauber(t);
    Kernel b = block_dynamics(t, BlockWeights::uniform_singletons(4));
    CHECK((g.P - b.P).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("even-odd chain on the bipartition") {
    BlockWeights eo = BlockWeights::from_partition(greedy_partition(t->sys->graph));
    Kernel k = block_dynamics(t, eo);
    KernelChecks c = kernel_checks(k);
    CHECK(c.row_sum_error <= 1e-12);
    CHECK(c.stationarity_tv <= 1e-12);
    CHECK(c.reversibility_error <= 1e-12);
    CHECK(coverage_delta(eo, 4) == doctest::Approx(0.5));
  }
}

TEST_CASE("flip dynamics") {
  FlipParams vigoda = FlipParams::load(std::string(SPINLAB_SOURCE_DIR) + "/configs/flip_params.json");
  CHECK(vigoda.p[1] == 1.0);
  CHECK(vigoda.p[2] == doctest::Approx(13.0 / 42));
  CHECK(!vigoda.source.empty());

  SUBCASE("p_s = 1(s=1) reduces to accept-only-singletons recoloring") {
    TablePtr t = table_of(build_colorings(Graph::cycle(4), 4));
    Kernel flip = flip_dynamics(t, FlipParams::single_vertex_only());
    // direct construction: pick (x,a); move only if no neighbor of x wears a
    const int n = 4, q = 4;
    MatrixXd P = MatrixXd::Zero(t->size(), t->size());
    for (Index i = 0; i < t->size(); ++i) {
      const Config& sigma = t->states[static_cast<std::size_t>(i)];
      for (int x = 0; x < n; ++x)
        for (int a = 0; a < q; ++a) {
          bool blocked = false;
          for (int u : t->sys->graph.adj[static_cast<std::size_t>(x)]) blocked = blocked || sigma[u] == a;
          if (blocked) {
            P(i, i) += 1.0 / (n * q);
          } else {
            Config next = sigma;
            next[x] = a;
            P(i, t->find(next)) += 1.0 / (n * q);
          }
        }
    }
    CHECK((flip.P - P).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("a size-2 component flips with probability p2/2") {
    // path 0-1-2 colored (0,1,2): the (0,1)-bicolored component of vertex 0
    // is {0,1} because vertex 2 wears color 2
    TablePtr t = table_of(build_colorings(Graph::path(3), 3));
    Kernel flip = flip_dynamics(t, vigoda);
    Config sigma(3), flipped(3);
    sigma << 0, 1, 2;
    flipped << 1, 0, 2;
    Index i = t->find(sigma);
    Index j = t->find(flipped);
    // selections (x=0,a=1) and (x=1,a=0) both pick that component
    double expect = 2.0 / (3 * 3) * (vigoda.p[2] / 2);
    CHECK(flip.P(i, j) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("components touching a pinned vertex freeze") {
    TablePtr t = table_of(build_colorings(Graph::path(3), 3), Pinning::single(2, 2));
    Kernel flip = flip_dynamics(t, vigoda);
    CHECK(kernel_checks(flip).stationarity_tv <= 1e-12);
    // from (0,1,2): the {1,2}-component of vertex 1 reaches the pinned vertex,
    // so its flip never happens and the target stays outside the table
    Config target(3);
    target << 0, 2, 1;
    CHECK(t->find(target) == -1);
  }
  SUBCASE("kernel checks and meta bounds") {
    TablePtr t = table_of(build_colorings(Graph::cycle(4), 4));
    Kernel flip = flip_dynamics(t, vigoda);
    KernelChecks c = kernel_checks(flip);
    CHECK(c.row_sum_error <= 1e-12);
    CHECK(c.stationarity_tv <= 1e-12);
    CHECK(c.reversibility_error <= 1e-12);
    CHECK(flip.meta.max_block_size <= 6.0);
    double bound = std::pow(double(t->sys->graph.max_degree), 6.0) / t->n();
    CHECK(flip.meta.max_selection_prob <= std::min(bound, 1.0) + 1e-12);
  }
  SUBCASE("non-colorings systems are rejected") {
    TablePtr t = table_of(build_ising(Graph::path(2), 0.2, 0.0));
    CHECK_THROWS(flip_dynamics(t, vigoda));
  }
}

TEST_CASE("swendsen-wang") {
  SUBCASE("beta = 0 jumps straight to the uniform product") {
    TablePtr t = table_of(build_potts(Graph::cycle(4), 3, 0.0));
    Kernel sw = swendsen_wang(t);
    for (Index i = 0; i < sw.size(); ++i)
      CHECK((sw.P.row(i).transpose() - t->probs).cwiseAbs().maxCoeff() <= 1e-13);
  }
  SUBCASE("single ising edge matches the enumerated two-stage law") {
    TablePtr t = table_of(build_ising(Graph::path(2), 0.5, 0.0));
    Kernel sw = swendsen_wang(t);
    MatrixXd direct = oracle::direct_sw_matrix(*t);
    CHECK((sw.P - direct).cwiseAbs().maxCoeff() <= 1e-14);
    // from a monochromatic state: keep (p) then both flip together (q=2), or
    // drop (1-p) and recolor independently
    double p = 1 - std::exp(-0.5);
    Index i = t->find((Config(2) << 0, 0).finished());
    Index j = t->find((Config(2) << 1, 1).finished());
    CHECK(sw.P(i, j) == doctest::Approx(p / 2 + (1 - p) / 4).epsilon(1e-13));
  }
  SUBCASE("stationarity and reversibility on a potts cycle") {
    TablePtr t = table_of(build_potts(Graph::cycle(4), 3, 0.4));
    Kernel sw = swendsen_wang(t);
    KernelChecks c = kernel_checks(sw);
    CHECK(c.row_sum_error <= 1e-12);
    CHECK(c.stationarity_tv <= 1e-11);
    CHECK(c.reversibility_error <= 1e-11);
  }
  SUBCASE("rejects pinnings, fields, and the wrong models") {
    CHECK_THROWS(swendsen_wang(table_of(build_ising(Graph::path(2), 0.5, 0.3))));
    CHECK_THROWS(swendsen_wang(table_of(build_colorings(Graph::path(2), 3))));
    CHECK_THROWS(swendsen_wang(table_of(build_ising(Graph::path(2), 0.5, 0.0), Pinning::single(0, 0))));
  }
}

TEST_CASE("select-update dynamics") {
  TablePtr t = table_of(build_ising(Graph::cycle(4), 0.3, 0.0));
  SUBCASE("heat-bath block dynamics is a special case") {
    BlockWeights alpha = BlockWeights::make({{0, 1}, {2, 3}, {1, 2}},
                                            (VectorXd(3) << 0.5, 0.3, 0.2).finished(), 4);
    SelectUpdate su;
    su.blocks = alpha.blocks;
    VectorXd probs = alpha.probs;
    su.selector = [probs](Index) { return probs; };
    su.updater = [t](Index state, int b_idx) {
      static const std::vector<std::vector<int>> blocks = {{0, 1}, {2, 3}, {1, 2}};
      return heat_bath_update_row(*t, blocks[static_cast<std::size_t>(b_idx)], state);
    };
    Kernel k = select_update(t, su);
    Kernel b = block_dynamics(t, alpha);
    CHECK((k.P - b.P).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK(k.meta.max_block_size == 2.0);
  }
  SUBCASE("flip dynamics is a select-update instance") {
    TablePtr ct = table_of(build_colorings(Graph::cycle(4), 4));
    FlipParams fp = FlipParams::single_vertex_only();
    Kernel flip = flip_dynamics(ct, fp);
    // blocks = singletons; selector uniform over (x) after integrating colors;
    // updater mimics the color draw
    SelectUpdate su;
    for (int v = 0; v < 4; ++v) su.blocks.push_back({v});
    su.selector = [](Index) { return VectorXd::Constant(4, 0.25); };
    su.updater = [ct](Index state, int x) {
      const Config& sigma = ct->states[static_cast<std::size_t>(state)];
      const int q = 4;
      VectorXd row = VectorXd::Zero(ct->size());
      for (int a = 0; a < q; ++a) {
        bool blocked = false;
        for (int u : ct->sys->graph.adj[static_cast<std::size_t>(x)]) blocked = blocked || sigma[u] == a;
        if (blocked) {
          row[state] += 1.0 / q;
        } else {
          Config next = sigma;
          next[x] = a;
          row[ct->find(next)] += 1.0 / q;
        }
      }
      return row;
    };
    Kernel k = select_update(ct, su);
    CHECK((k.P - flip.P).cwiseAbs().maxCoeff() <= 1e-13);
  }
  SUBCASE("always-pick-one-vertex heat bath") {
    SelectUpdate su;
    su.blocks = {{2}};
    su.selector = [](Index) { return VectorXd::Ones(1); };
    su.updater = [t](Index state, int) { return heat_bath_update_row(*t, {2}, state); };
    Kernel k = select_update(t, su);
    FiberIndex fx = make_fibers(*t, {2});
    for (Index i = 0; i < t->size(); ++i)
      for (Index j = 0; j < t->size(); ++j) {
        double expect = fx.fiber_of[static_cast<std::size_t>(i)] == fx.fiber_of[static_cast<std::size_t>(j)]
                            ? t->probs[j] / fx.fiber_prob[static_cast<std::size_t>(fx.fiber_of[static_cast<std::size_t>(i)])]
                            : 0.0;
        CHECK(std::abs(k.P(i, j) - expect) <= 1e-13);
      }
    CHECK(k.meta.max_selection_prob == 1.0);
  }
  SUBCASE("broken updaters fail the stationarity check loudly") {
    SelectUpdate su;
    su.blocks = {{0}};
    su.selector = [](Index) { return VectorXd::Ones(1); };
    su.updater = [t](Index, int) {
      VectorXd row = VectorXd::Zero(t->size());
      row[0] = 1.0;  // always jump to the first state
      return row;
    };
    CHECK_THROWS_AS((void)select_update(t, su), std::runtime_error);
  }
}

TEST_CASE("samplers agree with their matrices") {
  // quick fidelity smoke test; the acceptance suite runs the full budget
  Rng rng(2024);
  TablePtr t = table_of(build_ising(Graph::cycle(4), 0.3, 0.0));
  Kernel g = glauber(t);
  SamplerFidelity sf = sampler_fidelity(g, t->states[0], 200000, rng.child("g"));
  CHECK(sf.max_z <= 4.5);
  Kernel sw = swendsen_wang(t);
  SamplerFidelity sw_sf = sampler_fidelity(sw, t->states[3], 200000, rng.child("sw"));
  CHECK(sw_sf.max_z <= 4.5);
  TablePtr ct = table_of(build_colorings(Graph::cycle(4), 4));
  Kernel flip = flip_dynamics(ct, FlipParams::load(std::string(SPINLAB_SOURCE_DIR) +
                                                   "/configs/flip_params.json"));
  SamplerFidelity f_sf = sampler_fidelity(flip, ct->states[1], 200000, rng.child("f"));
  CHECK(f_sf.max_z <= 4.5);
}
