#include "spinlab/contraction.hpp"

#include <algorithm>
#include <cmath>

#include "spinlab/parallel.hpp"

namespace spinlab {

namespace {

struct PairScan {
  double kappa = -1;
  Index worst_i = -1, worst_j = -1;
  Index pairs = 0;
};

PairScan scan_pairs(const Kernel& k, const Metric& m, PairMode mode) {
  if (!k.has_matrix()) throw std::invalid_argument("measure_kappa: exact matrix required");
  const GibbsTable& t = *k.space;
  const Index n = t.size();
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      if (mode == PairMode::adjacent_pairs &&
          hamming(t.states[static_cast<std::size_t>(i)], t.states[static_cast<std::size_t>(j)]) != 1)
        continue;
      pairs.push_back({i, j});
    }
  std::vector<double> ratio(pairs.size(), -1.0);
  parallel_for(Index(pairs.size()), [&](Index p) {
    auto [i, j] = pairs[static_cast<std::size_t>(p)];
    double d = m(t.states[static_cast<std::size_t>(i)], t.states[static_cast<std::size_t>(j)]);
    if (d <= 0) return;
    double w1 = w1_rows(m, t, k.P.row(i), t, k.P.row(j));
    ratio[static_cast<std::size_t>(p)] = w1 / d;
  });
  PairScan out;
  out.pairs = Index(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p)
    if (ratio[p] > out.kappa) {
      out.kappa = ratio[p];
      out.worst_i = pairs[p].first;
      out.worst_j = pairs[p].second;
    }
  return out;
}

}  // namespace

ContractionReport measure_kappa(const Kernel& k, const Metric& m, PairMode mode, const Caps& caps) {
  if (k.size() > caps.pair_state_cap) throw CapExceeded("measure_kappa: state space exceeds pair cap");
  ContractionReport rep;
  rep.mode = mode;
  rep.metric_desc = m.describe();
  rep.surrogate = mode == PairMode::adjacent_pairs && m.kind == Metric::Kind::custom;
  PairScan scan = scan_pairs(k, m, mode);
  rep.kappa = std::max(scan.kappa, 0.0);
  rep.pairs = scan.pairs;
  rep.worst_i = scan.worst_i;
  rep.worst_j = scan.worst_j;
  rep.worst_pinning = k.space->pinning;
  return rep;
}

ContractionReport measure_kappa_sweep(const GibbsTable& master, const KernelBuilder& build,
                                      const Metric& m, PairMode mode, const Caps& caps) {
  if (master.size() > caps.pair_state_cap)
    throw CapExceeded("measure_kappa_sweep: state space exceeds pair cap");
  ContractionReport rep;
  rep.mode = mode;
  rep.metric_desc = m.describe();
  rep.pinning_sweep = true;
  rep.surrogate = mode == PairMode::adjacent_pairs && m.kind == Metric::Kind::custom;

  std::vector<Pinning> pinnings;
  auto master_ptr = std::make_shared<GibbsTable>(master);
  auto sweep = for_each_pinning(master, caps, [&](const Pinning& tau, const std::vector<Index>& members) {
    if (members.size() >= 2) pinnings.push_back(tau);
  });
  rep.sampled = sweep.sampled;
  struct Local {
    PairScan scan;
  };
  std::vector<Local> results(pinnings.size());
  parallel_for(Index(pinnings.size()), [&](Index i) {
    TablePtr t = pinnings[static_cast<std::size_t>(i)].empty()
                     ? TablePtr(master_ptr)
                     : restrict_table(master_ptr, pinnings[static_cast<std::size_t>(i)]);
    Kernel k = build(t);
    results[static_cast<std::size_t>(i)].scan = scan_pairs(k, m, mode);
  });
  rep.kappa = 0;
  double best = -1;
  for (std::size_t i = 0; i < pinnings.size(); ++i) {
    rep.per_pinning.push_back({pinnings[i], std::max(results[i].scan.kappa, 0.0)});
    rep.pairs += results[i].scan.pairs;
    if (results[i].scan.kappa > best) {
      best = results[i].scan.kappa;
      rep.worst_pinning = pinnings[i];
      rep.worst_i = results[i].scan.worst_i;
      rep.worst_j = results[i].scan.worst_j;
    }
  }
  rep.kappa = std::max(best, 0.0);
  return rep;
}

LocalityReport measure_locality_phi(const GibbsTable& master, const KernelBuilder& build,
                                    const Pinning& tau, int x, int a) {
  auto master_ptr = std::make_shared<GibbsTable>(master);
  TablePtr t_tau = tau.empty() ? master_ptr : restrict_table(master_ptr, tau);
  TablePtr t_ext = restrict_table(t_tau, Pinning::single(x, a));
  Kernel p_tau = build(t_tau);
  Kernel p_ext = build(t_ext);
  Metric dh = Metric::hamming();
  LocalityReport out;
  for (Index s = 0; s < t_ext->size(); ++s) {
    Index i = t_tau->find(t_ext->states[static_cast<std::size_t>(s)]);
    if (i < 0) throw std::runtime_error("measure_locality_phi: state embedding failed");
    double w1 = w1_rows(dh, *t_tau, p_tau.P.row(i), *t_ext, p_ext.P.row(s));
    if (w1 > out.phi) {
      out.phi = w1;
      out.worst_state = s;
    }
  }
  return out;
}

double predicted_eta(EtaBoundKind kind, double kappa, int n, double gamma, double phi) {
  if (kappa >= 1) throw std::invalid_argument("predicted_eta: kappa < 1 required");
  switch (kind) {
    case EtaBoundKind::glauber_weighted:
      return 2.0 / ((1 - kappa) * n);
    case EtaBoundKind::glauber_gamma:
      return 2.0 * gamma * gamma / ((1 - kappa) * n);
    case EtaBoundKind::general:
      return 2.0 * gamma * gamma * phi / (1 - kappa);
  }
  return kNaN;
}

SteinReport verify_stein_bound(const Kernel& P, const Kernel& Q, const Metric& m, const VectorXd& f,
                               double kappa_precomputed, double expected_w1_precomputed) {
  SteinReport out;
  const GibbsTable& sp = *P.space;
  const GibbsTable& sq = *Q.space;
  out.kappa = std::isnan(kappa_precomputed)
                  ? measure_kappa(P, m, PairMode::all_pairs).kappa
                  : kappa_precomputed;
  if (out.kappa >= 1) throw std::invalid_argument("verify_stein_bound: kappa < 1 required");
  out.lipschitz = lipschitz_constant(m, sp, f);

  KahanSum lhs_mu, lhs_nu;
  for (Index i = 0; i < sp.size(); ++i) lhs_mu.add(sp.probs[i] * f[i]);
  for (Index j = 0; j < sq.size(); ++j) {
    Index i = sp.find(sq.states[static_cast<std::size_t>(j)]);
    if (i < 0) throw std::invalid_argument("verify_stein_bound: Q state not in P space");
    lhs_nu.add(sq.probs[j] * f[i]);
  }
  out.lhs = std::abs(lhs_mu.value() - lhs_nu.value());

  if (std::isnan(expected_w1_precomputed)) {
    KahanSum ew;
    for (Index j = 0; j < sq.size(); ++j) {
      Index i = sp.find(sq.states[static_cast<std::size_t>(j)]);
      ew.add(sq.probs[j] * w1_rows(m, sp, P.P.row(i), sq, Q.P.row(j)));
    }
    out.expected_w1 = ew.value();
  } else {
    out.expected_w1 = expected_w1_precomputed;
  }
  out.rhs = out.lipschitz / (1 - out.kappa) * out.expected_w1;
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

VectorXd influence_sign_function(const InfluenceMatrix& jm, int x, int a, const GibbsTable& space) {
  int row = -1;
  for (std::size_t r = 0; r < jm.index.size(); ++r)
    if (jm.index[r] == std::make_pair(x, a)) row = int(r);
  if (row < 0) throw std::invalid_argument("influence_sign_function: (x,a) not in index");
  VectorXd f = VectorXd::Zero(space.size());
  for (Index i = 0; i < space.size(); ++i) {
    const Config& c = space.states[static_cast<std::size_t>(i)];
    double v = 0;
    for (std::size_t s = 0; s < jm.index.size(); ++s) {
      auto [y, ap] = jm.index[s];
      if (c[y] != ap) continue;
      double J = jm.J(row, Index(s));
      v += J > 0 ? 1 : (J < 0 ? -1 : 0);
    }
    f[i] = v;
  }
  return f;
}

std::optional<ContractionWeights> dobrushin_contraction_weights(const MatrixXd& R, double eps) {
  for (double delta : {1e-6, 1e-8, 1e-10, 1e-12}) {
    VectorXd w = perron_vector(R, delta);
    if ((w.array() <= 0).any()) continue;
    VectorXd slack = (1 - eps) * w - R * w;
    if (slack.minCoeff() >= 0) return ContractionWeights{w, slack.minCoeff()};
  }
  return std::nullopt;
}

InfluenceSums sum_absolute_influence(const InfluenceMatrix& jm, const VectorXd& vertex_weights) {
  InfluenceSums out;
  const int dim = int(jm.index.size());
  bool weighted = vertex_weights.size() > 0;
  for (int r = 0; r < dim; ++r) {
    double s = 0;
    for (int c = 0; c < dim; ++c) {
      double wy = weighted ? vertex_weights[jm.index[static_cast<std::size_t>(c)].first] : 1.0;
      s += wy * std::abs(jm.J(r, c));
    }
    if (weighted) s /= vertex_weights[jm.index[static_cast<std::size_t>(r)].first];
    out.s.push_back(s);
    out.max_s = std::max(out.max_s, s);
  }
  out.lambda1_value = lambda1(jm);
  out.lambda1_dominated = out.lambda1_value <= out.max_s + 1e-10;
  return out;
}

}  // namespace spinlab
