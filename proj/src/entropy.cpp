#include "spinlab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spinlab/parallel.hpp"
#include "spinlab/report.hpp"

namespace spinlab {

double entropy(const VectorXd& probs, const VectorXd& f) {
  if ((f.array() < 0).any()) throw std::invalid_argument("entropy: f must be nonnegative");
  KahanSum mean;
  for (Index i = 0; i < probs.size(); ++i) mean.add(probs[i] * f[i]);
  double mu_f = mean.value();
  if (mu_f <= 0) throw std::invalid_argument("entropy: mu[f] must be positive");
  KahanSum e;
  for (Index i = 0; i < probs.size(); ++i)
    if (f[i] > 0) e.add(probs[i] * f[i] * std::log(f[i] / mu_f));
  return e.value();
}

double entropy(const GibbsTable& t, const VectorXd& f) { return entropy(t.probs, f); }

double conditional_entropy_avg(const GibbsTable& t, const FiberIndex& fx, const VectorXd& f) {
  std::vector<double> pf(static_cast<std::size_t>(fx.count), 0.0);
  KahanSum flogf;
  for (Index i = 0; i < t.size(); ++i) {
    pf[static_cast<std::size_t>(fx.fiber_of[static_cast<std::size_t>(i)])] += t.probs[i] * f[i];
    if (f[i] > 0) flogf.add(t.probs[i] * f[i] * std::log(f[i]));
  }
  KahanSum out;
  out.add(flogf.value());
  for (int fid = 0; fid < fx.count; ++fid)
    if (pf[static_cast<std::size_t>(fid)] > 0)
      out.add(-pf[static_cast<std::size_t>(fid)] * std::log(pf[static_cast<std::size_t>(fid)] / fx.fiber_prob[static_cast<std::size_t>(fid)]));
  return out.value();
}

double conditional_entropy_avg(const GibbsTable& t, const std::vector<int>& block,
                               const VectorXd& f) {
  return conditional_entropy_avg(t, make_fibers(t, block), f);
}

double dirichlet_form(const Kernel& k, const VectorXd& f, const VectorXd& g) {
  if (!k.has_matrix()) throw std::invalid_argument("dirichlet_form: matrix required");
  VectorXd ig = g - k.P * g;
  KahanSum s;
  for (Index i = 0; i < k.size(); ++i) s.add(k.stationary()[i] * f[i] * ig[i]);
  return s.value();
}

double dirichlet_form_sum(const Kernel& k, const VectorXd& f, const VectorXd& g) {
  KahanSum s;
  const VectorXd& mu = k.stationary();
  for (Index i = 0; i < k.size(); ++i)
    for (Index j = 0; j < k.size(); ++j)
      if (k.P(i, j) > 0) s.add(0.5 * mu[i] * k.P(i, j) * (f[i] - f[j]) * (g[i] - g[j]));
  return s.value();
}

double block_covariance_form(const GibbsTable& t, const BlockWeights& alpha, const VectorXd& f,
                             const VectorXd& g) {
  KahanSum total;
  for (std::size_t b = 0; b < alpha.blocks.size(); ++b) {
    double ab = alpha.probs[Index(b)];
    if (ab <= 0) continue;
    std::vector<int> free_block;
    for (int v : alpha.blocks[b])
      if (!t.pinning.pins(v)) free_block.push_back(v);
    FiberIndex fx = make_fibers(t, free_block);
    VectorXd fb = conditional_expectation(t, fx, f);
    VectorXd gb = conditional_expectation(t, fx, g);
    KahanSum cov;
    for (Index i = 0; i < t.size(); ++i) cov.add(t.probs[i] * (f[i] - fb[i]) * (g[i] - gb[i]));
    total.add(ab * cov.value());
  }
  return total.value();
}

std::vector<VectorXd> random_test_functions(Index dim, int count, Rng rng,
                                            TestFunctionStyle style) {
  std::vector<VectorXd> fs;
  fs.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    Rng r = rng.child(std::uint64_t(c));
    VectorXd f(dim);
    int kind = style == TestFunctionStyle::positive ? (c % 2) : (c % 4);
    switch (kind) {
      case 0:  // iid exponential
        for (Index i = 0; i < dim; ++i) f[i] = r.exponential();
        break;
      case 1:  // exponentiated gaussian
        for (Index i = 0; i < dim; ++i) f[i] = std::exp(0.9 * r.gaussian());
        break;
      case 2: {  // indicator of a random subset
        double keep = 0.05 + 0.5 * r.uniform();
        bool any = false;
        for (Index i = 0; i < dim; ++i) {
          f[i] = r.uniform() < keep ? 1.0 : 0.0;
          any = any || f[i] > 0;
        }
        if (!any) f[r.uniform_int(int(dim))] = 1.0;
        break;
      }
      default: {  // sharp spike on a few states
        f.setConstant(1e-3);
        int spikes = 1 + r.uniform_int(3);
        for (int s = 0; s < spikes; ++s) f[r.uniform_int(int(dim))] = 1.0 + 9.0 * r.uniform();
        break;
      }
    }
    fs.push_back(std::move(f));
  }
  return fs;
}

std::string Functional::name() const {
  switch (kind) {
    case Kind::AT: return "AT";
    case Kind::GBF: return "GBF";
    case Kind::UBF: return "UBF(" + std::to_string(ell) + ")";
    case Kind::kpartite: return "kpartite";
    case Kind::subadditivity: return "subadditivity";
  }
  return "?";
}

namespace {

// reusable fiber structures per functional
struct FunctionalEval {
  const GibbsTable& t;
  const Functional& fn;
  std::vector<FiberIndex> fibers;     // per block
  std::vector<double> block_weight;   // multiplier per block
  double lhs_scale = 1;               // multiplies Ent f on the LHS
  bool subadd = false;
  bool sampled = false;

  FunctionalEval(const GibbsTable& table, const Functional& f, const Caps& caps) : t(table), fn(f) {
    switch (fn.kind) {
      case Functional::Kind::AT:
        for (int x : t.free_vertices) {
          fibers.push_back(make_fibers(t, {x}));
          block_weight.push_back(1.0);
        }
        break;
      case Functional::Kind::GBF: {
        for (std::size_t b = 0; b < fn.alpha.blocks.size(); ++b) {
          if (fn.alpha.probs[Index(b)] <= 0) continue;
          std::vector<int> free_block;
          for (int v : fn.alpha.blocks[b])
            if (!t.pinning.pins(v)) free_block.push_back(v);
          fibers.push_back(make_fibers(t, free_block));
          block_weight.push_back(fn.alpha.probs[Index(b)]);
        }
        lhs_scale = coverage_delta(fn.alpha, t.n());
        break;
      }
      case Functional::Kind::UBF: {
        int n = t.n();
        double m = binomial(n, fn.ell);
        if (m > double(caps.pinning_cap)) throw CapExceeded("UBF: too many subsets");
        for_each_combination(n, fn.ell, [&](const std::vector<int>& S) {
          fibers.push_back(make_fibers(t, S));
          block_weight.push_back(1.0 / m);
        });
        lhs_scale = double(fn.ell) / double(n);
        break;
      }
      case Functional::Kind::kpartite:
        for (auto& cls : fn.partition.classes) {
          fibers.push_back(make_fibers(t, cls));
          block_weight.push_back(1.0);
        }
        break;
      case Functional::Kind::subadditivity:
        subadd = true;
        for (int x : t.free_vertices) {
          std::vector<int> rest;
          for (int v : t.free_vertices)
            if (v != x) rest.push_back(v);
          fibers.push_back(make_fibers(t, rest));  // condition on sigma_x only
          block_weight.push_back(1.0);
        }
        break;
    }
  }

  // (LHS, RHS) of the inequality LHS <= C * RHS
  std::pair<double, double> sides(const VectorXd& f) const {
    double ent = entropy(t, f);
    if (!subadd) {
      KahanSum rhs;
      for (std::size_t b = 0; b < fibers.size(); ++b)
        rhs.add(block_weight[b] * conditional_entropy_avg(t, fibers[b], f));
      return {lhs_scale * ent, rhs.value()};
    }
    // sum_x Ent(mu(f | sigma_x)) <= C Ent(f)
    KahanSum lhs;
    for (std::size_t b = 0; b < fibers.size(); ++b) {
      VectorXd g = conditional_expectation(t, fibers[b], f);
      lhs.add(entropy(t, g));
    }
    return {lhs.value(), ent};
  }
};

}  // namespace

std::pair<double, double> factorization_sides(const GibbsTable& t, const Functional& fn,
                                              const VectorXd& f, const Caps& caps) {
  return FunctionalEval(t, fn, caps).sides(f);
}

FactorizationReport measure_factorization(const GibbsTable& t, const Functional& fn,
                                          const std::vector<VectorXd>& fs, int hill_climb_budget,
                                          Rng rng, const Caps& caps) {
  FunctionalEval eval(t, fn, caps);
  FactorizationReport rep;
  rep.functional = fn.name();
  rep.sampled = eval.sampled;

  std::vector<double> ratios(fs.size(), -1.0);
  std::vector<std::pair<double, double>> sides(fs.size());
  parallel_for(Index(fs.size()), [&](Index i) {
    double ent = entropy(t, fs[static_cast<std::size_t>(i)]);
    if (ent < 1e-13) return;  // degenerate
    auto [lhs, rhs] = eval.sides(fs[static_cast<std::size_t>(i)]);
    sides[static_cast<std::size_t>(i)] = {lhs, rhs};
    if (rhs > 1e-13) ratios[static_cast<std::size_t>(i)] = lhs / rhs;
  });
  VectorXd best_f;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (ratios[i] < 0) {
      ++rep.num_skipped;
      continue;
    }
    ++rep.num_functions;
    if (ratios[i] > rep.measured_C_lower) {
      rep.measured_C_lower = ratios[i];
      best_f = fs[i];
      rep.witness_lhs = sides[i].first;
      rep.witness_rhs = sides[i].second;
    }
  }
  // multiplicative coordinate ascent from the best starting function
  if (best_f.size() > 0 && hill_climb_budget > 0) {
    VectorXd f = best_f;
    double best = rep.measured_C_lower;
    double step = 0.5;
    for (int it = 0; it < hill_climb_budget; ++it) {
      Index i = rng.uniform_int(int(f.size()));
      double old = f[i];
      double factor = rng.uniform() < 0.5 ? (1 + step) : 1.0 / (1 + step);
      f[i] = old * factor;
      double ratio = -1;
      if (entropy(t, f) >= 1e-13) {
        auto [lhs, rhs] = eval.sides(f);
        if (rhs > 1e-13) ratio = lhs / rhs;
      }
      if (ratio > best) {
        best = ratio;
        auto [lhs, rhs] = eval.sides(f);
        rep.witness_lhs = lhs;
        rep.witness_rhs = rhs;
      } else {
        f[i] = old;
        step = std::max(step * 0.99, 0.02);
      }
    }
    if (best > rep.measured_C_lower) {
      rep.measured_C_lower = best;
      best_f = f;
    }
  }
  rep.worst_f = best_f;
  // witness validation: LHS <= C_lower * RHS + 1e-10 by construction
  if (best_f.size() > 0 &&
      rep.witness_lhs > rep.measured_C_lower * rep.witness_rhs + 1e-10)
    throw std::runtime_error("measure_factorization: witness inconsistent");
  return rep;
}

std::string FactorizationReport::to_json() const {
  JsonWriter w;
  w.begin_object();
  w.key("functional");
  w.value(functional);
  w.key("measured_C_lower");
  w.value(measured_C_lower);
  w.key("num_functions");
  w.value(Index(num_functions));
  w.key("num_skipped");
  w.value(Index(num_skipped));
  w.key("witness_lhs");
  w.value(witness_lhs);
  w.key("witness_rhs");
  w.value(witness_rhs);
  w.key("theorem_C");
  if (std::isnan(theorem_C)) w.null(); else w.value(theorem_C);
  w.key("sampled");
  w.value(sampled);
  w.key("witness_f");
  w.begin_array();
  for (Index i = 0; i < worst_f.size(); ++i) w.value(worst_f[i]);
  w.end_array();
  w.end_object();
  return w.str();
}

BrascampLiebResult brascamp_lieb_check(const GibbsTable& t, double C, const MatrixXd& phis) {
  if (C < 1) throw std::invalid_argument("brascamp_lieb_check: C >= 1 required");
  BrascampLiebResult out;
  KahanSum lhs;
  for (Index i = 0; i < t.size(); ++i) {
    double prod = 1;
    for (int v = 0; v < t.n(); ++v) prod *= phis(v, t.states[static_cast<std::size_t>(i)][v]);
    lhs.add(t.probs[i] * prod);
  }
  out.lhs = lhs.value();
  double log_rhs = 0;
  MatrixXd marg = t.vertex_marginals();
  for (int v = 0; v < t.n(); ++v) {
    double mv = 0;
    for (int a = 0; a < t.q(); ++a) mv += marg(v, a) * std::pow(std::abs(phis(v, a)), C);
    log_rhs += std::log(mv) / C;
  }
  out.rhs = std::exp(log_rhs);
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

namespace {

double relative_entropy(const VectorXd& nu, const VectorXd& mu) {
  KahanSum h;
  for (Index i = 0; i < nu.size(); ++i) {
    if (nu[i] <= 0) continue;
    if (mu[i] <= 0) return std::numeric_limits<double>::infinity();
    h.add(nu[i] * std::log(nu[i] / mu[i]));
  }
  return std::max(h.value(), 0.0);
}

VectorXd project_simplex(VectorXd v) {
  // Euclidean projection onto the probability simplex
  const Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0, theta = 0;
  for (Index i = 0; i < n; ++i) {
    cum += u[static_cast<std::size_t>(i)];
    double t = (cum - 1.0) / double(i + 1);
    if (u[static_cast<std::size_t>(i)] - t > 0) theta = t;
  }
  for (Index i = 0; i < n; ++i) v[i] = std::max(v[i] - theta, 0.0);
  double s = v.sum();
  if (s <= 0) v.setConstant(1.0 / double(n));
  else v /= s;
  return v;
}

}  // namespace

DecayRateResult entropy_decay_rate(const Kernel& k, Rng rng, int random_starts, int ascent_iters) {
  if (!k.has_matrix()) throw std::invalid_argument("entropy_decay_rate: matrix required");
  const VectorXd& mu = k.stationary();
  const Index n = k.size();
  auto ratio_of = [&](const VectorXd& nu) -> double {
    double h0 = relative_entropy(nu, mu);
    if (!std::isfinite(h0) || h0 < 1e-13) return -1;
    VectorXd nu1 = k.P.transpose() * nu;
    return relative_entropy(nu1, mu) / h0;
  };

  DecayRateResult out;
  VectorXd best;
  double best_ratio = -1;
  auto consider = [&](const VectorXd& nu) {
    double r = ratio_of(nu);
    if (r > best_ratio) {
      best_ratio = r;
      best = nu;
    }
  };
  // point masses
  for (Index i = 0; i < n; ++i) {
    VectorXd nu = VectorXd::Zero(n);
    nu[i] = 1;
    consider(nu);
  }
  // random starts: Dirichlet draws and tilted mu
  for (int s = 0; s < random_starts; ++s) {
    Rng r = rng.child(std::uint64_t(s));
    VectorXd nu(n);
    if (s % 2 == 0) {
      for (Index i = 0; i < n; ++i) nu[i] = r.exponential();
    } else {
      for (Index i = 0; i < n; ++i) nu[i] = mu[i] * std::exp(1.5 * r.gaussian());
    }
    nu /= nu.sum();
    consider(nu);
  }
  if (best_ratio < 0) {
    // every start degenerate (single-state chain): one step equilibrates
    out.delta = 1;
    out.best_ratio = 0;
    return out;
  }
  // projected gradient ascent on the simplex from the best start
  VectorXd nu = best;
  double step = 0.1;
  for (int it = 0; it < ascent_iters; ++it) {
    // gradient of H(nuP|mu)/H(nu|mu)
    double h0 = relative_entropy(nu, mu);
    if (h0 < 1e-13) break;
    VectorXd nu1 = k.P.transpose() * nu;
    double h1 = relative_entropy(nu1, mu);
    VectorXd g1(n), g0(n);
    for (Index i = 0; i < n; ++i) g0[i] = nu[i] > 0 ? std::log(nu[i] / mu[i]) + 1 : -745.0;
    VectorXd logterm(n);
    for (Index i = 0; i < n; ++i) logterm[i] = nu1[i] > 0 ? std::log(nu1[i] / mu[i]) + 1 : -745.0;
    g1 = k.P * logterm;
    VectorXd grad = (g1 * h0 - h1 * g0) / (h0 * h0);
    VectorXd cand = project_simplex(nu + step * grad);
    double rc = ratio_of(cand);
    if (rc > best_ratio) {
      best_ratio = rc;
      nu = cand;
      best = cand;
      step *= 1.2;
    } else {
      step *= 0.5;
      if (step < 1e-12) break;
    }
  }
  out.best_ratio = best_ratio;
  out.best_nu = best;
  out.delta = 1 - best_ratio;
  return out;
}

MlsiResult mlsi_check(const Kernel& k, double rho, const std::vector<VectorXd>& fs, double tol) {
  MlsiResult out;
  out.min_margin = std::numeric_limits<double>::infinity();
  for (const VectorXd& f : fs) {
    if ((f.array() <= 0).any()) continue;
    VectorXd logf = f.array().log();
    double margin = dirichlet_form(k, f, logf) - rho * entropy(*k.space, f);
    out.min_margin = std::min(out.min_margin, margin);
    ++out.checked;
  }
  out.pass = out.checked > 0 && out.min_margin >= -tol;
  return out;
}

MlsiResult lsi_check(const Kernel& k, double s, const std::vector<VectorXd>& fs, double tol) {
  MlsiResult out;
  out.min_margin = std::numeric_limits<double>::infinity();
  for (const VectorXd& f : fs) {
    if ((f.array() < 0).any()) continue;
    VectorXd sq = f.cwiseSqrt();
    double margin = dirichlet_form(k, sq, sq) - s * entropy(*k.space, f);
    out.min_margin = std::min(out.min_margin, margin);
    ++out.checked;
  }
  out.pass = out.checked > 0 && out.min_margin >= -tol;
  return out;
}

MixingResult exact_mixing_time(const Kernel& k, double delta_for_bound, Index iteration_cap) {
  if (!k.has_matrix()) throw std::invalid_argument("exact_mixing_time: matrix required");
  MixingResult out;
  const VectorXd& mu = k.stationary();
  MatrixXd Pt = k.P;
  for (Index t = 1; t <= iteration_cap; ++t) {
    double worst = 0;
    for (Index i = 0; i < k.size(); ++i)
      worst = std::max(worst, tv_distance(Pt.row(i).transpose(), mu));
    if (worst <= 0.25) {
      out.t_mix = t;
      break;
    }
    Pt = Pt * k.P;
  }
  out.converged = out.t_mix > 0;
  if (!out.converged) throw std::runtime_error("exact_mixing_time: iteration cap exceeded");
  if (!std::isnan(delta_for_bound) && delta_for_bound > 0) {
    double mu_star = mu.minCoeff();
    out.bound = 1 + (std::log(8.0) + std::log(std::log(1.0 / mu_star))) / delta_for_bound;
    out.bound_holds = double(out.t_mix) <= out.bound + 1e-9;
  }
  return out;
}

RecursionReport recursion_quantities(const GibbsTable& master, double eta, double b,
                                     const std::vector<VectorXd>& fs, const Caps& caps) {
  const int n = master.n();
  if (!master.pinning.empty())
    throw std::invalid_argument("recursion_quantities: master table must be unpinned");
  RecursionReport rep;
  rep.n = n;
  rep.eta = eta;
  rep.b = b;
  rep.R = int(std::ceil(2 * eta / b));
  rep.local_min_margin = std::numeric_limits<double>::infinity();
  rep.global_c_min_margin = std::numeric_limits<double>::infinity();
  rep.global_kappa_min_margin = std::numeric_limits<double>::infinity();
  rep.kappa_fallingfactorial_min_margin = std::numeric_limits<double>::infinity();

  rep.alpha_theory.resize(static_cast<std::size_t>(std::max(n - 1, 0)));
  rep.alpha_measured.assign(static_cast<std::size_t>(std::max(n - 1, 0)),
                            std::numeric_limits<double>::infinity());
  for (int k = 0; k <= n - 2; ++k)
    rep.alpha_theory[static_cast<std::size_t>(k)] = std::max(1.0 - 2 * eta / (b * (n - k - 1)), 0.0);

  // local inequality over every pinning (U, tau) with |U| <= n-2
  auto sweep = for_each_pinning(master, caps, [&](const Pinning& tau, const std::vector<Index>& members) {
    int k = tau.size();
    if (k > n - 2 || members.size() < 1) return;
    // conditional slice
    std::vector<double> p;
    double z = 0;
    for (Index i : members) z += master.probs[i];
    for (Index i : members) p.push_back(master.probs[i] / z);
    std::vector<int> free;
    for (int v = 0; v < n; ++v)
      if (!tau.pins(v)) free.push_back(v);
    const int nf = int(free.size());
    const int q = master.q();
    double alpha_k = rep.alpha_theory[static_cast<std::size_t>(k)];

    for (const VectorXd& f : fs) {
      // single-vertex and pair conditional means within the slice
      double mean = 0;
      for (std::size_t s = 0; s < members.size(); ++s) mean += p[s] * f[members[s]];
      if (mean <= 0) continue;
      // Ent_{mu^tau}(mu^{tau,x} f) for each free x
      double av_x = 0;
      for (int xi = 0; xi < nf; ++xi) {
        int x = free[static_cast<std::size_t>(xi)];
        std::vector<double> pf(static_cast<std::size_t>(q), 0.0), pw(static_cast<std::size_t>(q), 0.0);
        for (std::size_t s = 0; s < members.size(); ++s) {
          int a = master.states[static_cast<std::size_t>(members[s])][x];
          pf[static_cast<std::size_t>(a)] += p[s] * f[members[s]];
          pw[static_cast<std::size_t>(a)] += p[s];
        }
        double ent = 0;
        for (int a = 0; a < q; ++a)
          if (pf[static_cast<std::size_t>(a)] > 0)
            ent += pf[static_cast<std::size_t>(a)] * std::log(pf[static_cast<std::size_t>(a)] / (pw[static_cast<std::size_t>(a)] * mean));
        av_x += ent;
      }
      av_x /= nf;
      if (nf < 2) continue;
      double av_xy = 0;
      for (int xi = 0; xi < nf; ++xi)
        for (int yi = 0; yi < nf; ++yi) {
          if (xi == yi) continue;
          int x = free[static_cast<std::size_t>(xi)], y = free[static_cast<std::size_t>(yi)];
          std::vector<double> pf(static_cast<std::size_t>(q * q), 0.0), pw(static_cast<std::size_t>(q * q), 0.0);
          for (std::size_t s = 0; s < members.size(); ++s) {
            int key = master.states[static_cast<std::size_t>(members[s])][x] * q + master.states[static_cast<std::size_t>(members[s])][y];
            pf[static_cast<std::size_t>(key)] += p[s] * f[members[s]];
            pw[static_cast<std::size_t>(key)] += p[s];
          }
          double ent = 0;
          for (int key = 0; key < q * q; ++key)
            if (pf[static_cast<std::size_t>(key)] > 0)
              ent += pf[static_cast<std::size_t>(key)] * std::log(pf[static_cast<std::size_t>(key)] / (pw[static_cast<std::size_t>(key)] * mean));
          av_xy += ent;
        }
      av_xy /= double(nf) * (nf - 1);
      rep.local_min_margin = std::min(rep.local_min_margin, av_xy - (1 + alpha_k) * av_x);
      if (av_x > 1e-13)
        rep.alpha_measured[static_cast<std::size_t>(k)] =
            std::min(rep.alpha_measured[static_cast<std::size_t>(k)], av_xy / av_x - 1);
    }
  });
  rep.sampled = sweep.sampled;

  // kappa_j from the theoretical alphas
  rep.gamma_prod.assign(static_cast<std::size_t>(n), 0.0);
  rep.gamma_prod[0] = 1;
  for (int i = 1; i <= n - 1; ++i)
    rep.gamma_prod[static_cast<std::size_t>(i)] =
        rep.gamma_prod[static_cast<std::size_t>(i) - 1] * rep.alpha_theory[static_cast<std::size_t>(i) - 1];
  double gamma_total = 0;
  for (int i = 0; i <= n - 1; ++i) gamma_total += rep.gamma_prod[static_cast<std::size_t>(i)];
  rep.kappa_theory.assign(static_cast<std::size_t>(std::max(n - 1, 0)), 0.0);
  for (int j = 1; j <= n - 1; ++j) {
    double tail = 0;
    for (int i = j; i <= n - 1; ++i) tail += rep.gamma_prod[static_cast<std::size_t>(i)];
    rep.kappa_theory[static_cast<std::size_t>(j - 1)] = tail / gamma_total;
  }
  // falling-factorial lower bound on kappa_j
  for (int j = 1; j <= n - 1; ++j) {
    double ff = 1;
    for (int r = 1; r <= rep.R; ++r) {
      double numer = n - j - r, denom = n - r;
      if (denom <= 0) { ff = 0; break; }
      ff *= std::max(numer, 0.0) / denom;
    }
    rep.kappa_fallingfactorial_min_margin =
        std::min(rep.kappa_fallingfactorial_min_margin, rep.kappa_theory[static_cast<std::size_t>(j - 1)] - ff);
  }

  // global consequences per f and ell
  for (int ell = 1; ell <= n - 1; ++ell) {
    std::vector<FiberIndex> fibers;  // condition on sigma_U, |U| = ell
    for_each_combination(n, ell, [&](const std::vector<int>& U) {
      std::vector<int> rest;
      for (int v = 0; v < n; ++v)
        if (std::find(U.begin(), U.end(), v) == U.end()) rest.push_back(v);
      fibers.push_back(make_fibers(master, rest));
    });
    double m = double(fibers.size());
    for (const VectorXd& f : fs) {
      double ent = entropy(master, f);
      if (ent < 1e-13) continue;
      double av_ent_proj = 0;   // Av_{|U|=ell} Ent(mu^U f)
      double av_ent_cond = 0;   // Av_{|L|=n-ell} mu[Ent_L f] with L = complement
      for (auto& fx : fibers) {
        VectorXd g = conditional_expectation(master, fx, f);
        double e = entropy(master, g);
        av_ent_proj += e;
        av_ent_cond += ent - e;
      }
      av_ent_proj /= m;
      av_ent_cond /= m;
      rep.global_c_min_margin = std::min(
          rep.global_c_min_margin, double(rep.R + 1) * ent - double(n) / ell * av_ent_proj);
      double kap = rep.kappa_theory[static_cast<std::size_t>(ell - 1)];
      // kappa_{ell} Ent f <= Av_{|L| = n - ell} mu[Ent_L f]
      rep.global_kappa_min_margin =
          std::min(rep.global_kappa_min_margin, av_ent_cond - kap * ent);
    }
  }
  return rep;
}

PinskerResult pinsker_variance_bound(const GibbsTable& t, int x, const VectorXd& f, double b) {
  if (t.pinning.pins(x)) throw std::invalid_argument("pinsker_variance_bound: x is pinned");
  PinskerResult out;
  KahanSum mean;
  for (Index i = 0; i < t.size(); ++i) mean.add(t.probs[i] * f[i]);
  if (mean.value() <= 0) throw std::invalid_argument("pinsker_variance_bound: mu[f] must be positive");
  const int q = t.q();
  std::vector<double> pf(static_cast<std::size_t>(q), 0.0), pw(static_cast<std::size_t>(q), 0.0);
  for (Index i = 0; i < t.size(); ++i) {
    int a = t.states[static_cast<std::size_t>(i)][x];
    pf[static_cast<std::size_t>(a)] += t.probs[i] * f[i] / mean.value();
    pw[static_cast<std::size_t>(a)] += t.probs[i];
  }
  double var = 0, ent = 0;
  for (int a = 0; a < q; ++a) {
    if (pw[static_cast<std::size_t>(a)] <= 0) continue;
    double h = pf[static_cast<std::size_t>(a)] / pw[static_cast<std::size_t>(a)];  // normalized conditional mean
    var += pw[static_cast<std::size_t>(a)] * (h - 1) * (h - 1);
    if (h > 0) ent += pw[static_cast<std::size_t>(a)] * h * std::log(h);
  }
  out.var = var;
  out.ent = ent;
  out.margin = (2.0 / b) * ent - var;
  out.holds = out.margin >= -1e-10;
  return out;
}

double spectral_gap(const Kernel& k) {
  if (!k.has_matrix()) throw std::invalid_argument("spectral_gap: matrix required");
  const VectorXd& mu = k.stationary();
  VectorXd sq = mu.cwiseSqrt();
  MatrixXd S = sq.asDiagonal() * k.P * sq.cwiseInverse().asDiagonal();
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  VectorXd ev = es.eigenvalues();
  // second largest eigenvalue
  Index m = ev.size();
  return m >= 2 ? 1.0 - ev[m - 2] : 1.0;
}

}  // namespace spinlab
