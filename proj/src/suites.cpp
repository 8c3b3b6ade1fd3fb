#include <algorithm>
#include <cmath>

#include "spinlab/harness.hpp"

namespace spinlab {

namespace {

CheckRecord make_check(const std::string& name, double measured, double bound, double tol,
                       bool sampled = false) {
  CheckRecord rec;
  rec.name = name;
  rec.set("measured", measured);
  rec.bound = bound;
  rec.tolerance = tol;
  rec.margin = bound - measured;
  rec.pass = rec.margin >= -tol;
  rec.sampled = sampled;
  return rec;
}

CheckRecord make_margin_check(const std::string& name, double min_margin, double tol,
                              bool sampled = false) {
  CheckRecord rec;
  rec.name = name;
  rec.margin = min_margin;
  rec.tolerance = tol;
  rec.pass = min_margin >= -tol;
  rec.sampled = sampled;
  return rec;
}

CheckRecord info_check(const std::string& name) {
  CheckRecord rec;
  rec.name = name;
  rec.pass = true;
  return rec;
}

bool full_support(const GibbsTable& t) {
  double total = std::pow(double(t.q()), double(t.n()));
  return double(t.size()) == total;
}

BlockWeights random_block_weights(int n, Rng& rng, int max_blocks = 4) {
  std::vector<std::vector<int>> blocks;
  int nb = 2 + rng.uniform_int(max_blocks - 1);
  std::vector<char> covered(static_cast<std::size_t>(n), 0);
  for (int b = 0; b < nb; ++b) {
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
  for (Index b = 0; b < probs.size(); ++b) probs[b] = rng.exponential() + 0.05;
  probs /= probs.sum();
  return BlockWeights::make(std::move(blocks), std::move(probs), n);
}

bool sw_applicable(const SpinSystem& sys) {
  if (sys.kind != ModelKind::ising && sys.kind != ModelKind::potts) return false;
  if (sys.beta <= 0) return false;
  for (auto& b : sys.B)
    if ((b.array() - b[0]).abs().maxCoeff() > 0) return false;
  return true;
}

}  // namespace

std::vector<CheckRecord> suite_exactness(const Instance& inst, const Caps& caps, Rng rng) {
  std::vector<CheckRecord> out;
  const GibbsTable& t = *inst.table;

  out.push_back(make_check("gibbs_normalization", std::abs(t.probs.sum() - 1.0), 0, 1e-12));

  InfluenceMatrix J = influence_matrix(t);
  out.push_back(make_check("influence_self_adjoint", J.self_adjoint_residual, 0, 1e-10));
  out.push_back(make_check("influence_block_rows", J.block_row_residual, 0, 1e-10));
  out.push_back(make_check("lambda1_nonnegative", -lambda1(J), 0, 1e-10));

  Kernel gl = glauber(inst.table);
  KernelChecks kc = kernel_checks(gl);
  out.push_back(make_check("glauber_row_sums", kc.row_sum_error, 0, 1e-11));
  out.push_back(make_check("glauber_stationarity", kc.stationarity_tv, 0, 1e-10));
  out.push_back(make_check("glauber_reversibility", kc.reversibility_error, 0, 1e-10));

  Kernel bl = block_dynamics(inst.table, BlockWeights::uniform_singletons(t.n()));
  out.push_back(make_check("glauber_equals_singleton_blocks",
                           (gl.P - bl.P).cwiseAbs().maxCoeff(), 0, 1e-14));

  BlockWeights alpha = random_block_weights(t.n(), rng);
  Kernel bd = block_dynamics(inst.table, alpha);
  KernelChecks bc = kernel_checks(bd);
  out.push_back(make_check("block_row_sums", bc.row_sum_error, 0, 1e-11));
  out.push_back(make_check("block_stationarity", bc.stationarity_tv, 0, 1e-10));
  out.push_back(make_check("block_reversibility", bc.reversibility_error, 0, 1e-10));

  // influence residuals under a couple of single-site pinnings
  double pinned_residual = 0;
  int tried = 0;
  for (int x : t.free_vertices) {
    if (tried >= 2) break;
    for (int a = 0; a < t.q() && tried < 2; ++a) {
      if (t.marginal(x, a) <= 0) continue;
      TablePtr rt = restrict_table(inst.table, Pinning::single(x, a));
      if (rt->free_vertices.empty()) continue;
      InfluenceMatrix Jp = influence_matrix(*rt);
      pinned_residual = std::max(pinned_residual, Jp.self_adjoint_residual);
      ++tried;
    }
  }
  out.push_back(make_check("influence_self_adjoint_pinned", pinned_residual, 0, 1e-10));

  if (sw_applicable(*inst.sys)) {
    Kernel sw = swendsen_wang(inst.table);
    KernelChecks sc = kernel_checks(sw);
    out.push_back(make_check("sw_row_sums", sc.row_sum_error, 0, 1e-11));
    out.push_back(make_check("sw_stationarity", sc.stationarity_tv, 0, 1e-10));
    out.push_back(make_check("sw_reversibility", sc.reversibility_error, 0, 1e-10));
  }
  return out;
}

std::vector<CheckRecord> suite_contraction_si(const Instance& inst, const Caps& caps, Rng rng) {
  std::vector<CheckRecord> out;
  const GibbsTable& master = *inst.table;
  const int n = master.n();

  SpectralIndependence si = spectral_independence(master, caps);
  {
    CheckRecord rec = info_check("spectral_independence");
    rec.set("eta", si.eta);
    rec.set("pinnings", double(si.pinnings));
    rec.sampled = si.sampled;
    rec.input("witness", si.witness.describe());
    out.push_back(rec);
  }

  KernelBuilder build = [](const TablePtr& t) { return glauber(t); };
  struct MetricCase {
    std::string label;
    Metric m;
    EtaBoundKind kind;
  };
  std::vector<MetricCase> cases;
  cases.push_back({"hamming", Metric::hamming(), EtaBoundKind::glauber_weighted});
  for (int draw = 0; draw < 3; ++draw) {
    Rng r = rng.child("weights").child(std::uint64_t(draw));
    VectorXd w(n);
    for (int v = 0; v < n; ++v) w[v] = std::exp(r.uniform(-0.45, 0.45));
    cases.push_back({"weighted_" + std::to_string(draw), Metric::weighted(w),
                     EtaBoundKind::glauber_weighted});
  }
  {
    Metric cm = Metric::random_gamma_equivalent(master, 1.5, rng.child("custom_metric"), 1.05);
    MetricCheck mc = validate_metric(cm, master);
    CheckRecord rec = make_check("custom_metric_axioms", mc.max_violation, 0, 1e-9);
    rec.input("worst", mc.what);
    out.push_back(rec);
    cases.push_back({"custom_gamma1.5", std::move(cm), EtaBoundKind::glauber_gamma});
  }

  for (auto& c : cases) {
    ContractionReport cr = measure_kappa_sweep(master, build, c.m, PairMode::all_pairs, caps);
    CheckRecord krec = info_check("kappa_" + c.label);
    krec.set("kappa", cr.kappa);
    krec.set("pairs", double(cr.pairs));
    krec.sampled = cr.sampled;
    krec.input("worst_pinning", cr.worst_pinning.describe());
    out.push_back(krec);
    if (cr.kappa < 1) {
      double bound = predicted_eta(c.kind, cr.kappa, n, c.m.gamma);
      CheckRecord rec = make_check("eta_bound_" + c.label, si.eta, bound, 1e-8,
                                   si.sampled || cr.sampled);
      rec.set("kappa", cr.kappa);
      rec.set("eta", si.eta);
      out.push_back(rec);
    } else {
      CheckRecord rec = info_check("eta_bound_" + c.label + "_skipped");
      rec.input("reason", "kappa >= 1");
      out.push_back(rec);
    }
  }

  // locality of the Glauber family: Phi <= 1/n over a few adjacent pinning pairs
  double phi_max = 0;
  int tried = 0;
  for (int x : master.free_vertices) {
    if (tried >= 3) break;
    for (int a = 0; a < master.q() && tried < 3; ++a) {
      if (master.marginal(x, a) <= 0) continue;
      phi_max = std::max(phi_max, measure_locality_phi(master, build, {}, x, a).phi);
      ++tried;
    }
  }
  out.push_back(make_check("glauber_phi_locality", phi_max, 1.0 / n, 1e-10));
  return out;
}

std::vector<CheckRecord> suite_dobrushin_si(const Instance& inst, const Caps& caps, Rng rng) {
  std::vector<CheckRecord> out;
  const GibbsTable& master = *inst.table;
  const int n = master.n();

  MatrixXd R = dobrushin_matrix(*inst.sys, {}, caps);
  SpectralRadiusResult rho = spectral_radius(R);
  {
    CheckRecord rec = info_check("dobrushin_rho");
    rec.set("rho", rho.rho);
    rec.set("norm_inf", R.cwiseAbs().rowwise().sum().maxCoeff());
    out.push_back(rec);
  }
  double eps = 1 - rho.rho;
  if (eps <= 0) {
    CheckRecord rec = info_check("dobrushin_skipped");
    rec.input("reason", "rho >= 1");
    out.push_back(rec);
    return out;
  }

  SpectralIndependence si = spectral_independence(master, caps);
  {
    CheckRecord rec = make_check("eta_vs_2_over_eps", si.eta, 2.0 / eps, 1e-8, si.sampled);
    rec.set("eps", eps);
    rec.set("eta", si.eta);
    out.push_back(rec);
  }

  auto cw = dobrushin_contraction_weights(R, eps * 0.999999);
  {
    CheckRecord rec;
    rec.name = "contraction_weights";
    rec.pass = cw.has_value();
    if (cw) rec.set("slack", cw->slack);
    out.push_back(rec);
  }

  // pinned monotonicity rho(R^tau) <= rho(R) on sampled pinnings
  double worst = -std::numeric_limits<double>::infinity();
  Rng pin_rng = rng.child("pinned");
  int samples = 50;
  for (int s = 0; s < samples; ++s) {
    Rng r = pin_rng.child(std::uint64_t(s));
    int k = 1 + r.uniform_int(std::max(n - 1, 1));
    Index pick = r.discrete(master.probs.data(), int(master.size()));
    std::vector<int> verts(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) verts[static_cast<std::size_t>(v)] = v;
    for (int i = 0; i < k; ++i) std::swap(verts[static_cast<std::size_t>(i)], verts[static_cast<std::size_t>(i + r.uniform_int(n - i))]);
    Pinning tau;
    for (int i = 0; i < k; ++i)
      tau.assign.push_back({verts[static_cast<std::size_t>(i)], master.states[static_cast<std::size_t>(pick)][verts[static_cast<std::size_t>(i)]]});
    std::sort(tau.assign.begin(), tau.assign.end());
    MatrixXd Rt = dobrushin_matrix(*inst.sys, tau, caps);
    double rt = spectral_radius(Rt).rho;
    worst = std::max(worst, rt - rho.rho);
  }
  out.push_back(make_margin_check("rho_pinned_monotone", -worst, 1e-9, true));

  // kappa^tau <= 1 - eps/n under the certified weights (full-support systems)
  if (cw && full_support(master)) {
    Metric dw = Metric::weighted(cw->w);
    KernelBuilder build = [](const TablePtr& t) { return glauber(t); };
    ContractionReport cr = measure_kappa_sweep(master, build, dw, PairMode::all_pairs, caps);
    double eps_used = eps * 0.999999;
    CheckRecord rec = make_check("kappa_weighted_all_pinnings", cr.kappa, 1 - eps_used / n, 1e-10,
                                 cr.sampled);
    out.push_back(rec);
  }
  return out;
}

std::vector<CheckRecord> suite_stein(const Instance& inst, const Caps& caps, Rng rng, int cases) {
  std::vector<CheckRecord> out;
  const GibbsTable& master = *inst.table;
  Metric dh = Metric::hamming();
  Kernel P = glauber(inst.table);
  double kappa = measure_kappa(P, dh, PairMode::all_pairs, caps).kappa;
  {
    CheckRecord rec = info_check("kappa_unpinned");
    rec.set("kappa", kappa);
    out.push_back(rec);
  }
  if (kappa >= 1) {
    CheckRecord rec = info_check("stein_skipped");
    rec.input("reason", "kappa >= 1");
    out.push_back(rec);
    return out;
  }
  InfluenceMatrix J = influence_matrix(master);
  InfluenceSums sums = sum_absolute_influence(J);

  // single-pinning chains Q and their expected one-step discrepancy
  struct Case {
    int x, a;
    Kernel Q;
    double expected_w1;
  };
  std::vector<Case> qs;
  for (auto& [x, a] : J.index) {
    TablePtr rt = restrict_table(inst.table, Pinning::single(x, a));
    Case c{x, a, glauber(rt), 0};
    KahanSum ew;
    for (Index j = 0; j < rt->size(); ++j) {
      Index i = master.find(rt->states[static_cast<std::size_t>(j)]);
      ew.add(rt->probs[j] * w1_rows(dh, master, P.P.row(i), *rt, c.Q.P.row(j)));
    }
    c.expected_w1 = ew.value();
    qs.push_back(std::move(c));
  }

  // the signed influence test function realizes lhs = S(x,a)
  double sign_gap = 0, min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < qs.size(); ++idx) {
    auto& c = qs[idx];
    VectorXd f = influence_sign_function(J, c.x, c.a, master);
    SteinReport sr = verify_stein_bound(P, c.Q, dh, f, kappa, c.expected_w1);
    sign_gap = std::max(sign_gap, std::abs(sr.lhs - sums.s[idx]));
    min_margin = std::min(min_margin, sr.rhs - sr.lhs);
  }
  out.push_back(make_check("sign_function_equals_influence_sum", sign_gap, 0, 1e-9));

  Rng frng = rng.child("f");
  for (int c = 0; c < cases; ++c) {
    Rng r = frng.child(std::uint64_t(c));
    auto& q = qs[static_cast<std::size_t>(r.uniform_int(int(qs.size())))];
    VectorXd f(master.size());
    for (Index i = 0; i < f.size(); ++i) f[i] = r.gaussian();
    SteinReport sr = verify_stein_bound(P, q.Q, dh, f, kappa, q.expected_w1);
    min_margin = std::min(min_margin, sr.rhs - sr.lhs);
  }
  CheckRecord rec = make_margin_check("stein_bound", min_margin, 1e-9);
  rec.set("cases", double(cases + int(qs.size())));
  out.push_back(rec);
  return out;
}

std::vector<CheckRecord> suite_entropy_identities(const Instance& inst, const Caps& caps, Rng rng,
                                                  int draws) {
  std::vector<CheckRecord> out;
  const GibbsTable& t = *inst.table;
  const int n = t.n();
  double deco_worst = 0, tele_worst = 0, mono_min = std::numeric_limits<double>::infinity();
  double shearer_min = std::numeric_limits<double>::infinity();
  double prod_worst = 0, prodest_min = std::numeric_limits<double>::infinity();
  bool shearer_any = false, prod_any = false;

  // a maximal independent set for the product-structure identities
  std::vector<int> indep;
  {
    std::vector<char> blocked(static_cast<std::size_t>(n), 0);
    for (int v : t.free_vertices) {
      if (blocked[static_cast<std::size_t>(v)]) continue;
      indep.push_back(v);
      for (int u : t.sys->graph.adj[static_cast<std::size_t>(v)]) blocked[static_cast<std::size_t>(u)] = 1;
    }
  }

  Rng drng = rng.child("draws");
  for (int d = 0; d < draws; ++d) {
    Rng r = drng.child(std::uint64_t(d));
    VectorXd f(t.size());
    for (Index i = 0; i < f.size(); ++i) f[i] = r.exponential();
    // random block
    std::vector<int> lambda;
    for (int v = 0; v < n; ++v)
      if (r.uniform() < 0.5) lambda.push_back(v);
    // decomposition Ent f = mu[Ent_L f] + Ent(mu_L f)
    double ent = entropy(t, f);
    double inner = conditional_entropy_avg(t, lambda, f);
    double outer = entropy(t, conditional_expectation(t, lambda, f));
    deco_worst = std::max(deco_worst, std::abs(ent - inner - outer));
    // monotonicity over a chain and telescoping
    std::vector<int> bigger = lambda;
    for (int v = 0; v < n; ++v)
      if (r.uniform() < 0.5 && std::find(bigger.begin(), bigger.end(), v) == bigger.end())
        bigger.push_back(v);
    std::sort(bigger.begin(), bigger.end());
    mono_min = std::min(mono_min,
                        conditional_entropy_avg(t, bigger, f) - conditional_entropy_avg(t, lambda, f));
    {
      // nested chain L0 c L1 c L2: sum of increments telescopes exactly
      std::vector<int> l0 = lambda, l1 = bigger, l2;
      for (int v = 0; v < n; ++v) l2.push_back(v);
      VectorXd g0 = conditional_expectation(t, l0, f);
      double lhs = conditional_entropy_avg(t, l1, g0);
      VectorXd g1 = conditional_expectation(t, l1, g0);
      lhs += conditional_entropy_avg(t, l2, g1);
      double rhs = conditional_entropy_avg(t, l2, g0);
      tele_worst = std::max(tele_worst, std::abs(lhs - rhs));
    }
    // Shearer on an independent set with random subset weights
    if (!indep.empty() && d % 4 == 0) {
      int m = 2 + r.uniform_int(3);
      std::vector<std::vector<int>> subs;
      for (int s = 0; s < m; ++s) {
        std::vector<int> u;
        for (int v : indep)
          if (r.uniform() < 0.6) u.push_back(v);
        if (u.empty()) u.push_back(indep[static_cast<std::size_t>(r.uniform_int(int(indep.size())))]);
        subs.push_back(std::move(u));
      }
      VectorXd probs(Index(subs.size()));
      for (Index s = 0; s < probs.size(); ++s) probs[s] = r.exponential() + 0.05;
      probs /= probs.sum();
      VectorXd cover = VectorXd::Zero(n);
      for (std::size_t s = 0; s < subs.size(); ++s)
        for (int v : subs[s]) cover[v] += probs[Index(s)];
      double delta = std::numeric_limits<double>::infinity();
      for (int v : indep) delta = std::min(delta, cover[v]);
      KahanSum rhs;
      for (std::size_t s = 0; s < subs.size(); ++s)
        rhs.add(probs[Index(s)] * conditional_entropy_avg(t, subs[s], f));
      shearer_min =
          std::min(shearer_min, rhs.value() - delta * conditional_entropy_avg(t, indep, f));
      shearer_any = true;
    }
    // product factorization identities on slices where mu_Lambda is a product
    if (int(indep.size()) >= 2 && d % 4 == 1) {
      std::vector<int> A, B;
      for (int v : indep) (r.uniform() < 0.5 ? A : B).push_back(v);
      if (A.empty()) { A.push_back(B.back()); B.pop_back(); }
      if (!B.empty()) {
        std::vector<int> U;
        for (int v : B)
          if (r.uniform() < 0.6) U.push_back(v);
        // pin everything outside the independent set to a mu-random state
        Pinning tau;
        Index pick = r.discrete(t.probs.data(), int(t.size()));
        for (int v = 0; v < n; ++v)
          if (std::find(indep.begin(), indep.end(), v) == indep.end())
            tau.assign.push_back({v, t.states[static_cast<std::size_t>(pick)][v]});
        if (!tau.assign.empty()) {
          TablePtr rt = restrict_table(inst.table, tau);
          VectorXd fr(rt->size());
          for (Index i = 0; i < rt->size(); ++i) {
            Index gi = t.find(rt->states[static_cast<std::size_t>(i)]);
            fr[i] = f[gi];
          }
          VectorXd gB = conditional_expectation(*rt, B, fr);
          double lhs = entropy(*rt, gB);
          double rhs = conditional_entropy_avg(*rt, A, gB);
          prod_worst = std::max(prod_worst, std::abs(lhs - rhs));
          VectorXd gU = conditional_expectation(*rt, U, fr);
          prodest_min = std::min(prodest_min, conditional_entropy_avg(*rt, A, gU) -
                                                  conditional_entropy_avg(*rt, A, gB));
          prod_any = true;
        }
      }
    }
  }
  out.push_back(make_check("entropy_decomposition", deco_worst, 0, 1e-10));
  out.push_back(make_check("entropy_telescoping", tele_worst, 0, 1e-10));
  out.push_back(make_margin_check("entropy_monotonicity", mono_min, 1e-10));
  if (shearer_any) out.push_back(make_margin_check("shearer_independent_sets", shearer_min, 1e-10));
  if (prod_any) {
    out.push_back(make_check("product_factorization_identity", prod_worst, 0, 1e-10));
    out.push_back(make_margin_check("product_factorization_bound", prodest_min, 1e-10));
  }
  // projection property: conditioning twice equals conditioning once
  {
    Rng r = rng.child("projection");
    VectorXd f(t.size());
    for (Index i = 0; i < f.size(); ++i) f[i] = r.exponential();
    std::vector<int> B;
    for (int v = 0; v < n; ++v)
      if (r.uniform() < 0.6) B.push_back(v);
    VectorXd g = conditional_expectation(t, B, f);
    VectorXd gg = conditional_expectation(t, B, g);
    out.push_back(make_check("conditional_expectation_projection",
                             (g - gg).cwiseAbs().maxCoeff(), 0, 1e-12));
  }
  return out;
}

std::vector<CheckRecord> suite_factorization(const Instance& inst, const Caps& caps, Rng rng,
                                             int batch) {
  std::vector<CheckRecord> out;
  const GibbsTable& t = *inst.table;
  const int n = t.n();
  auto fs = random_test_functions(t.size(), batch, rng.child("batch"));

  FactorizationReport at =
      measure_factorization(t, Functional::at(), fs, 200, rng.child("hc_at"), caps);
  {
    CheckRecord rec = info_check("AT_constant");
    rec.set("C_lower", at.measured_C_lower);
    rec.set("skipped", at.num_skipped);
    out.push_back(rec);
  }
  // product measure: AT with C = 1 (Shearer); only meaningful without edges
  if (t.sys->graph.edges.empty())
    out.push_back(make_check("AT_product_C1", at.measured_C_lower, 1.0, 1e-9));

  Partition part = greedy_partition(t.sys->graph);
  FactorizationReport kp =
      measure_factorization(t, Functional::kpart(part), fs, 200, rng.child("hc_kp"), caps);
  {
    CheckRecord rec = info_check("kpartite_constant");
    rec.set("C_lower", kp.measured_C_lower);
    rec.set("k", part.k());
    out.push_back(rec);
  }

  Rng arng = rng.child("alpha");
  double gbf_order_min = std::numeric_limits<double>::infinity();
  double shearer_step_min = std::numeric_limits<double>::infinity();
  for (int ai = 0; ai < 2; ++ai) {
    Rng r = arng.child(std::uint64_t(ai));
    BlockWeights alpha = random_block_weights(n, r);
    double delta = coverage_delta(alpha, n);
    FactorizationReport gbf = measure_factorization(t, Functional::gbf(alpha), fs, 200,
                                                    rng.child("hc_gbf").child(std::uint64_t(ai)), caps);
    CheckRecord rec = info_check("GBF_constant_" + std::to_string(ai));
    rec.set("C_lower", gbf.measured_C_lower);
    rec.set("delta_alpha", delta);
    out.push_back(rec);
    // per-f chain: ratio_GBF <= k * ratio_kpartite, and the exact per-class
    // Shearer step delta(alpha) mu[Ent_{V_j} f] <= sum_B alpha_B mu[Ent_B f]
    std::vector<VectorXd> chain_fs = fs;
    if (gbf.worst_f.size() > 0) chain_fs.push_back(gbf.worst_f);
    for (const VectorXd& f : chain_fs) {
      double ent = entropy(t, f);
      if (ent < 1e-13) continue;
      auto [glhs, grhs] = factorization_sides(t, Functional::gbf(alpha), f, caps);
      auto [klhs, krhs] = factorization_sides(t, Functional::kpart(part), f, caps);
      if (grhs > 1e-13 && krhs > 1e-13)
        gbf_order_min = std::min(gbf_order_min, double(part.k()) * klhs / krhs - glhs / grhs);
      for (auto& cls : part.classes)
        shearer_step_min =
            std::min(shearer_step_min, grhs - delta * conditional_entropy_avg(t, cls, f));
    }
  }
  out.push_back(make_margin_check("gbf_le_k_times_kpartite", gbf_order_min, 1e-8));
  out.push_back(make_margin_check("gbf_shearer_step", shearer_step_min, 1e-10));

  for (int ell : {1, std::max(1, n / 2)}) {
    FactorizationReport ubf = measure_factorization(t, Functional::ubf(ell), fs, 100,
                                                    rng.child("hc_ubf").child(std::uint64_t(ell)), caps);
    CheckRecord rec = info_check("UBF_constant_l" + std::to_string(ell));
    rec.set("C_lower", ubf.measured_C_lower);
    out.push_back(rec);
    if (ell == 1) {
      // l=1 uniform blocks coincide with approximate tensorization
      out.push_back(make_check("UBF1_equals_AT", std::abs(ubf.measured_C_lower - at.measured_C_lower),
                               0, at.measured_C_lower * 0.5 + 1e-9));
    }
  }

  // Brascamp-Lieb consequence: the inequality for a given phi family only
  // needs the subadditivity ratio of its own product density, so those
  // densities join the measurement batch
  Rng r = rng.child("bl");
  std::vector<MatrixXd> phi_batch;
  std::vector<VectorXd> sub_fs = fs;
  for (int c = 0; c < 200; ++c) {
    Rng rc = r.child(std::uint64_t(c));
    MatrixXd phis(n, t.q());
    for (int v = 0; v < n; ++v)
      for (int a = 0; a < t.q(); ++a) phis(v, a) = std::exp(0.7 * rc.gaussian());
    VectorXd prod(t.size());
    for (Index i = 0; i < t.size(); ++i) {
      double w = 1;
      for (int v = 0; v < n; ++v) w *= phis(v, t.states[static_cast<std::size_t>(i)][v]);
      prod[i] = w;
    }
    phi_batch.push_back(std::move(phis));
    sub_fs.push_back(std::move(prod));
  }
  FactorizationReport sub =
      measure_factorization(t, Functional::subadd(), sub_fs, 200, rng.child("hc_sub"), caps);
  {
    CheckRecord rec = info_check("subadditivity_constant");
    rec.set("C_lower", sub.measured_C_lower);
    out.push_back(rec);
  }
  {
    double C = std::max(sub.measured_C_lower, 1.0);
    double min_margin = std::numeric_limits<double>::infinity();
    for (const MatrixXd& phis : phi_batch) {
      BrascampLiebResult bl = brascamp_lieb_check(t, C, phis);
      min_margin = std::min(min_margin, bl.rhs - bl.lhs);
    }
    CheckRecord rec = make_margin_check("brascamp_lieb", min_margin, 1e-9);
    rec.set("C", C);
    out.push_back(rec);
  }
  return out;
}

std::vector<CheckRecord> suite_recursion(const Instance& inst, const Caps& caps, Rng rng,
                                         int batch) {
  std::vector<CheckRecord> out;
  SpectralIndependence si = spectral_independence(*inst.table, caps);
  MarginalBoundResult mb = marginal_bound(*inst.table, caps);
  auto fs = random_test_functions(inst.table->size(), batch, rng.child("batch"));
  RecursionReport rep = recursion_quantities(*inst.table, si.eta, mb.b, fs, caps);
  bool sampled = si.sampled || mb.sampled || rep.sampled;
  {
    CheckRecord rec = info_check("recursion_inputs");
    rec.set("eta", si.eta);
    rec.set("b", mb.b);
    rec.set("R", rep.R);
    rec.sampled = sampled;
    out.push_back(rec);
  }
  out.push_back(make_margin_check("local_two_point_inequality", rep.local_min_margin, 1e-9, sampled));
  out.push_back(
      make_margin_check("global_subadditivity_R_plus_1", rep.global_c_min_margin, 1e-9, sampled));
  out.push_back(
      make_margin_check("global_kappa_form", rep.global_kappa_min_margin, 1e-9, sampled));
  out.push_back(make_margin_check("kappa_falling_factorial", rep.kappa_fallingfactorial_min_margin,
                                  1e-9, sampled));
  return out;
}

std::vector<CheckRecord> suite_pinsker(const Instance& inst, const Caps& caps, Rng rng, int batch) {
  std::vector<CheckRecord> out;
  const GibbsTable& t = *inst.table;
  MarginalBoundResult mb = marginal_bound(t, caps);
  double min_margin = std::numeric_limits<double>::infinity();
  Rng drng = rng.child("draws");
  for (int d = 0; d < batch; ++d) {
    Rng r = drng.child(std::uint64_t(d));
    // alternate between the full table and a random single pinning
    TablePtr table = inst.table;
    if (d % 2 == 1 && int(t.free_vertices.size()) >= 2) {
      Index pick = r.discrete(t.probs.data(), int(t.size()));
      int x = t.free_vertices[static_cast<std::size_t>(r.uniform_int(int(t.free_vertices.size())))];
      table = restrict_table(inst.table, Pinning::single(x, t.states[static_cast<std::size_t>(pick)][x]));
      if (table->free_vertices.empty()) table = inst.table;
    }
    VectorXd f(table->size());
    for (Index i = 0; i < f.size(); ++i) f[i] = r.exponential();
    int x = table->free_vertices[static_cast<std::size_t>(r.uniform_int(int(table->free_vertices.size())))];
    PinskerResult pr = pinsker_variance_bound(*table, x, f, mb.b);
    min_margin = std::min(min_margin, pr.margin);
  }
  CheckRecord rec = make_margin_check("pinsker_variance_entropy", min_margin, 1e-10, mb.sampled);
  rec.set("b", mb.b);
  rec.set("draws", batch);
  out.push_back(rec);
  return out;
}

std::vector<CheckRecord> suite_block_decay(const Instance& inst, const Caps& caps, Rng rng,
                                           int n_alpha, int batch) {
  std::vector<CheckRecord> out;
  const GibbsTable& t = *inst.table;
  auto fs = random_test_functions(t.size(), batch, rng.child("batch"));
  Rng arng = rng.child("alpha");
  double contraction_min = std::numeric_limits<double>::infinity();
  double gap_min = std::numeric_limits<double>::infinity();
  double tmix_min = std::numeric_limits<double>::infinity();
  double dirichlet_worst = 0;
  for (int ai = 0; ai < n_alpha; ++ai) {
    Rng r = arng.child(std::uint64_t(ai));
    BlockWeights alpha = random_block_weights(t.n(), r);
    double delta_alpha = coverage_delta(alpha, t.n());
    Kernel k = block_dynamics(inst.table, alpha);
    FactorizationReport gbf = measure_factorization(t, Functional::gbf(alpha), fs, 200,
                                                    rng.child("hc").child(std::uint64_t(ai)), caps);
    double C = std::max(gbf.measured_C_lower, 1.0);
    double rate = delta_alpha / C;
    // entropy contraction with the measured constant
    for (const VectorXd& f : fs) {
      double ent = entropy(t, f);
      if (ent < 1e-13) continue;
      VectorXd pf = k.P * f;
      contraction_min = std::min(contraction_min, (1 - rate) * ent - entropy(t, pf));
    }
    // spectral gap of the block kernel never exceeds the coverage
    gap_min = std::min(gap_min, delta_alpha - spectral_gap(k));
    // mixing bound with the better of the two certified rates
    DecayRateResult dr = entropy_decay_rate(k, rng.child("decay").child(std::uint64_t(ai)));
    double delta_eff = std::max(rate, dr.delta);
    MixingResult mr = exact_mixing_time(k, delta_eff);
    tmix_min = std::min(tmix_min, mr.bound - double(mr.t_mix));
    CheckRecord rec = info_check("block_alpha_" + std::to_string(ai));
    rec.set("delta_alpha", delta_alpha);
    rec.set("C_gbf", C);
    rec.set("decay_rate", dr.delta);
    rec.set("t_mix", double(mr.t_mix));
    rec.set("t_mix_bound", mr.bound);
    out.push_back(rec);
    // Dirichlet form of the block kernel equals the covariance mixture
    VectorXd f = fs[static_cast<std::size_t>(ai % fs.size())];
    VectorXd g = fs[static_cast<std::size_t>((ai + 1) % fs.size())];
    dirichlet_worst = std::max(dirichlet_worst, std::abs(dirichlet_form(k, f, g) -
                                                         block_covariance_form(t, alpha, f, g)));
  }
  out.push_back(make_margin_check("block_entropy_contraction", contraction_min, 1e-9));
  out.push_back(make_margin_check("spectral_gap_le_delta", gap_min, 1e-9));
  out.push_back(make_margin_check("t_mix_le_entropy_bound", tmix_min, 1e-9));
  out.push_back(make_check("block_dirichlet_identity", dirichlet_worst, 0, 1e-10));
  return out;
}

std::vector<CheckRecord> suite_sw_chain(const Instance& inst, const Caps& caps, Rng rng,
                                        int batch) {
  std::vector<CheckRecord> out;
  if (!sw_applicable(*inst.sys)) {
    CheckRecord rec = info_check("sw_skipped");
    rec.input("reason", "not a zero-field ferromagnetic Ising/Potts system");
    out.push_back(rec);
    return out;
  }
  const GibbsTable& t = *inst.table;
  JointTable joint = enumerate_joint(inst.table, caps);

  out.push_back(make_check("spin_marginal",
                           (joint_spin_marginal(joint) - t.probs).cwiseAbs().maxCoeff(), 0, 1e-11));
  out.push_back(make_check("log_partition_match",
                           std::abs(joint.log_partition - t.log_partition), 0, 1e-10));

  Kernel sw = swendsen_wang(inst.table);
  KernelChecks kc = kernel_checks(sw);
  out.push_back(make_check("sw_stationarity", kc.stationarity_tv, 0, 1e-10));
  out.push_back(make_check("sw_detailed_balance", kc.reversibility_error, 0, 1e-10));

  // edge marginal against the cluster-weight form q^{c(A)} p^{|A|} (1-p)^{|E|-|A|}
  {
    VectorXd em = joint_edge_marginal(joint);
    VectorXd rc(em.size());
    for (Index A = 0; A < rc.size(); ++A) {
      int ka = __builtin_popcount(std::uint32_t(A));
      rc[A] = std::pow(double(t.q()), component_count(t.sys->graph, std::uint32_t(A))) *
              std::pow(joint.p, ka) * std::pow(1 - joint.p, joint.num_edges - ka);
    }
    rc /= rc.sum();
    out.push_back(make_check("edge_marginal_cluster_weights", (em - rc).cwiseAbs().maxCoeff(), 0,
                             1e-12));
  }

  // spin/edge factorization constant; the batch includes spin-lifted functions
  // so the measured C certifies the one-step decay below
  auto joint_fs = random_test_functions(joint.size(), batch, rng.child("jbatch"));
  std::vector<VectorXd> spin_densities;
  {
    Rng r = rng.child("nu");
    for (int c = 0; c < batch; ++c) {
      Rng rc = r.child(std::uint64_t(c));
      VectorXd g(t.size());
      for (Index i = 0; i < g.size(); ++i) g[i] = rc.exponential() + 1e-6;
      KahanSum mean;
      for (Index i = 0; i < g.size(); ++i) mean.add(t.probs[i] * g[i]);
      g /= mean.value();
      spin_densities.push_back(g);
      VectorXd lift(joint.size());
      for (Index i = 0; i < joint.size(); ++i) lift[i] = g[joint.states[static_cast<std::size_t>(i)].spin];
      joint_fs.push_back(std::move(lift));
    }
  }
  SpinEdgeFactorization se = spin_edge_factorization(joint, joint_fs);
  {
    CheckRecord rec = info_check("spin_edge_constant");
    rec.set("C_lower", se.C_lower);
    rec.set("skipped", se.skipped);
    out.push_back(rec);
  }
  // one-step relative entropy decay at rate 1/C
  {
    double C = std::max(se.C_lower, 1.0);
    double min_margin = std::numeric_limits<double>::infinity();
    for (const VectorXd& g : spin_densities) {
      double h0 = entropy(t, g);
      if (h0 < 1e-13) continue;
      VectorXd g1 = sw.P * g;  // reversible: density evolves by P
      double h1 = entropy(t, g1);
      min_margin = std::min(min_margin, (1 - 1 / C) * h0 - h1);
    }
    CheckRecord rec = make_margin_check("sw_entropy_decay", min_margin, 1e-8);
    rec.set("C", C);
    out.push_back(rec);
  }
  // k-partite joint lemmas
  {
    Partition part = greedy_partition(t.sys->graph);
    KPartiteJointReport kj = kpartite_joint_checks(joint, part, joint_fs);
    out.push_back(make_margin_check("joint_edge_conditioning_monotone", kj.lemma_mono_min_margin,
                                    1e-10));
    CheckRecord rec = make_margin_check("joint_composed_factorization", kj.composed_min_margin,
                                        1e-9);
    rec.set("delta1", kj.delta1_hat);
    rec.set("delta2", kj.delta2_hat);
    rec.set("k", part.k());
    out.push_back(rec);
    // delta2 vs the spin-space k-partite constant on the projected batch
    std::vector<VectorXd> proj;
    for (const VectorXd& f : joint_fs) proj.push_back(joint_spin_projection(joint, f));
    FactorizationReport kp = measure_factorization(t, Functional::kpart(part), proj, 0,
                                                   rng.child("kp"), caps);
    if (kp.measured_C_lower > 0)
      out.push_back(make_margin_check("delta2_vs_kpartite",
                                      kj.delta2_hat - 1.0 / kp.measured_C_lower, 1e-8));
  }
  return out;
}

std::vector<CheckRecord> suite_sampler_fidelity(const Instance& inst, const Caps& caps, Rng rng,
                                                const std::string& flip_params_path, Index steps) {
  std::vector<CheckRecord> out;
  const GibbsTable& t = *inst.table;
  std::vector<Index> starts = {0, t.size() / 2, t.size() - 1};
  auto run_chain = [&](const std::string& label, const Kernel& k) {
    double max_z = 0;
    for (std::size_t s = 0; s < starts.size(); ++s) {
      SamplerFidelity sf = sampler_fidelity(k, t.states[static_cast<std::size_t>(starts[s])], steps,
                                            rng.child(label).child(std::uint64_t(s)));
      max_z = std::max(max_z, sf.max_z);
    }
    CheckRecord rec = make_check("sampler_" + label, max_z, 4.0, 0);
    rec.set("steps", double(steps));
    out.push_back(rec);
  };
  run_chain("glauber", glauber(inst.table));
  if (sw_applicable(*inst.sys)) run_chain("swendsen_wang", swendsen_wang(inst.table));
  if (inst.sys->kind == ModelKind::colorings) {
    FlipParams fp = flip_params_path.empty() ? FlipParams::single_vertex_only()
                                             : FlipParams::load(flip_params_path);
    run_chain("flip", flip_dynamics(inst.table, fp));
  }
  (void)caps;
  return out;
}

std::vector<CheckRecord> suite_spectral_gap(const Instance& inst, const Caps& caps, Rng rng,
                                            int n_alpha) {
  std::vector<CheckRecord> out;
  (void)caps;
  const int n = inst.table->n();
  double min_margin = std::numeric_limits<double>::infinity();
  {
    BlockWeights alpha = BlockWeights::uniform_singletons(n);
    Kernel k = block_dynamics(inst.table, alpha);
    min_margin = std::min(min_margin, coverage_delta(alpha, n) - spectral_gap(k));
  }
  Rng arng = rng.child("alpha");
  for (int ai = 0; ai < n_alpha; ++ai) {
    Rng r = arng.child(std::uint64_t(ai));
    BlockWeights alpha = random_block_weights(n, r);
    Kernel k = block_dynamics(inst.table, alpha);
    min_margin = std::min(min_margin, coverage_delta(alpha, n) - spectral_gap(k));
  }
  out.push_back(make_margin_check("spectral_gap_le_delta_alpha", min_margin, 1e-9));
  return out;
}

std::vector<CheckRecord> suite_mixing(const Instance& inst, const Caps& caps, Rng rng) {
  std::vector<CheckRecord> out;
  (void)caps;
  Kernel gl = glauber(inst.table);
  DecayRateResult dr = entropy_decay_rate(gl, rng.child("decay"));
  MixingResult mr = exact_mixing_time(gl, dr.delta);
  {
    CheckRecord rec = make_margin_check("t_mix_le_decay_bound", mr.bound - double(mr.t_mix), 1e-9);
    rec.set("t_mix", double(mr.t_mix));
    rec.set("delta", dr.delta);
    rec.set("bound", mr.bound);
    out.push_back(rec);
  }
  {
    auto fs = random_test_functions(inst.table->size(), 200, rng.child("mlsi"),
                                    TestFunctionStyle::positive);
    MlsiResult ml = mlsi_check(gl, dr.delta, fs, 1e-6);
    CheckRecord rec = make_margin_check("mlsi_at_decay_rate", ml.min_margin, 1e-6);
    rec.set("rho", dr.delta);
    rec.set("checked", ml.checked);
    out.push_back(rec);
  }
  {
    Kernel one = block_dynamics(inst.table, BlockWeights::single_block(inst.table->n()));
    MixingResult mr1 = exact_mixing_time(one, 1.0);
    out.push_back(make_check("single_block_mixes_in_one_step", double(mr1.t_mix), 1.0, 0));
  }
  return out;
}

std::vector<CheckRecord> suite_sweep_metrics(const Instance& inst, const Caps& caps, Rng rng) {
  std::vector<CheckRecord> out;
  CheckRecord rec = info_check("metrics");
  SpectralIndependence si = spectral_independence(*inst.table, caps);
  rec.set("eta", si.eta);
  Kernel gl = glauber(inst.table);
  double kappa = kNaN;
  if (inst.table->size() <= caps.pair_state_cap)
    kappa = measure_kappa(gl, Metric::hamming(), PairMode::all_pairs, caps).kappa;
  rec.set("kappa", kappa);
  DecayRateResult dr = entropy_decay_rate(gl, rng.child("decay"), 12, 150);
  rec.set("delta", dr.delta);
  MixingResult mr = exact_mixing_time(gl);
  rec.set("t_mix", double(mr.t_mix));
  rec.sampled = si.sampled;
  out.push_back(rec);
  return out;
}

}  // namespace spinlab
