#include "spinlab/edwards_sokal.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace spinlab {

namespace {

void require_sw_compatible(const SpinSystem& sys) {
  if (sys.kind != ModelKind::ising && sys.kind != ModelKind::potts)
    throw std::invalid_argument("joint measure: ferromagnetic Ising/Potts required");
  if (sys.beta < 0) throw std::invalid_argument("joint measure: beta >= 0 required");
  for (auto& b : sys.B)
    if ((b.array() - b[0]).abs().maxCoeff() > 0)
      throw std::invalid_argument("joint measure: spin-dependent fields unsupported");
  if (sys.graph.edges.size() > 31) throw CapExceeded("joint measure: too many edges for bitsets");
}

}  // namespace

std::uint32_t monochromatic_edges(const SpinSystem& sys, const Config& sigma) {
  std::uint32_t mask = 0;
  for (std::size_t e = 0; e < sys.graph.edges.size(); ++e) {
    auto [u, v] = sys.graph.edges[e];
    if (sigma[u] == sigma[v]) mask |= std::uint32_t(1) << e;
  }
  return mask;
}

int component_count(const Graph& g, std::uint32_t edge_set) {
  std::vector<int> parent(static_cast<std::size_t>(g.n));
  for (int v = 0; v < g.n; ++v) parent[static_cast<std::size_t>(v)] = v;
  std::function<int(int)> find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  int comps = g.n;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (!(edge_set >> e & 1)) continue;
    auto [u, v] = g.edges[e];
    int ru = find(u), rv = find(v);
    if (ru != rv) {
      parent[static_cast<std::size_t>(ru)] = rv;
      --comps;
    }
  }
  return comps;
}

JointTable enumerate_joint(const TablePtr& spin_table, const Caps& caps) {
  const SpinSystem& sys = *spin_table->sys;
  require_sw_compatible(sys);
  if (!spin_table->pinning.empty())
    throw std::invalid_argument("joint measure: no pinning supported");
  JointTable joint;
  joint.spin_table = spin_table;
  joint.num_edges = int(sys.graph.edges.size());
  joint.p = 1.0 - std::exp(-sys.beta);

  // joint weight (e^beta - 1)^|A| on compatible pairs: summing over A recovers
  // the spin weights factor by factor, so the log-partitions coincide
  double log_ew = sys.beta > 0 ? std::log(std::expm1(sys.beta)) : kNegInf;
  double log_field = 0;
  for (auto& b : sys.B) log_field += std::log(b[0]);

  std::vector<double> lw;
  Index total = 0;
  for (Index s = 0; s < spin_table->size(); ++s) {
    std::uint32_t mono = monochromatic_edges(sys, spin_table->states[static_cast<std::size_t>(s)]);
    total += Index(1) << __builtin_popcount(mono);
    if (total > caps.state_cap) throw CapExceeded("enumerate_joint: joint space exceeds cap");
    // submasks of mono in ascending order
    std::uint32_t a = 0;
    while (true) {
      int ka = __builtin_popcount(a);
      // zero-probability subsets still enumerate at beta = 0; keep them out
      if (ka == 0 || log_ew > kNegInf) {
        joint.states.push_back({s, a});
        lw.push_back(ka > 0 ? log_ew * ka + log_field : log_field);
      }
      if (a == mono) break;
      a = (a - mono) & mono;  // next submask upward
    }
  }
  Index m = Index(joint.states.size());
  VectorXd logw = Eigen::Map<VectorXd>(lw.data(), m);
  double shift = logw.maxCoeff();
  KahanSum z;
  joint.probs.resize(m);
  for (Index i = 0; i < m; ++i) {
    joint.probs[i] = std::exp(logw[i] - shift);
    z.add(joint.probs[i]);
  }
  joint.probs /= z.value();
  joint.log_partition = shift + std::log(z.value());
  return joint;
}

MatrixXd sw_step_composition(const JointTable& joint) {
  const GibbsTable& spin = *joint.spin_table;
  const SpinSystem& sys = *spin.sys;
  const Index ns = spin.size();
  const int q = spin.q();
  const double p = joint.p;
  MatrixXd P = MatrixXd::Zero(ns, ns);
  std::vector<std::uint32_t> mono(static_cast<std::size_t>(ns));
  for (Index s = 0; s < ns; ++s) mono[static_cast<std::size_t>(s)] = monochromatic_edges(sys, spin.states[static_cast<std::size_t>(s)]);
  for (const JointState& js : joint.states) {
    Index s = js.spin;
    std::uint32_t A = js.edge_set;
    int ka = __builtin_popcount(A);
    int km = __builtin_popcount(mono[static_cast<std::size_t>(s)]);
    // edge half-step: resample A from nu(.|sigma)
    double pa = (p == 0 && ka > 0) ? 0.0
                                   : std::pow(p, ka) * std::pow(1 - p, km - ka);
    if (pa == 0) continue;
    // spin half-step: uniform over labelings constant on components of (V, A)
    double ps = std::pow(double(q), -double(component_count(sys.graph, A)));
    for (Index s2 = 0; s2 < ns; ++s2)
      if ((A & ~mono[static_cast<std::size_t>(s2)]) == 0) P(s, s2) += pa * ps;
  }
  return P;
}

VectorXd joint_spin_marginal(const JointTable& joint) {
  VectorXd m = VectorXd::Zero(joint.spin_table->size());
  for (Index i = 0; i < joint.size(); ++i) m[joint.states[static_cast<std::size_t>(i)].spin] += joint.probs[i];
  return m;
}

VectorXd joint_edge_marginal(const JointTable& joint) {
  VectorXd m = VectorXd::Zero(Index(1) << joint.num_edges);
  for (Index i = 0; i < joint.size(); ++i) m[joint.states[static_cast<std::size_t>(i)].edge_set] += joint.probs[i];
  return m;
}

namespace {

double fiber_entropy_sum(const VectorXd& probs, const VectorXd& f, const std::vector<int>& fiber_of,
                         int fiber_count) {
  // sum_i p_i f_i log f_i - sum_F (sum p f) log(fiber mean)
  std::vector<double> pf(static_cast<std::size_t>(fiber_count), 0.0), pw(static_cast<std::size_t>(fiber_count), 0.0);
  KahanSum flogf;
  for (Index i = 0; i < probs.size(); ++i) {
    int fid = fiber_of[static_cast<std::size_t>(i)];
    pf[static_cast<std::size_t>(fid)] += probs[i] * f[i];
    pw[static_cast<std::size_t>(fid)] += probs[i];
    if (f[i] > 0) flogf.add(probs[i] * f[i] * std::log(f[i]));
  }
  KahanSum out;
  out.add(flogf.value());
  for (int fid = 0; fid < fiber_count; ++fid) {
    if (pf[static_cast<std::size_t>(fid)] > 0 && pw[static_cast<std::size_t>(fid)] > 0)
      out.add(-pf[static_cast<std::size_t>(fid)] * std::log(pf[static_cast<std::size_t>(fid)] / pw[static_cast<std::size_t>(fid)]));
  }
  return out.value();
}

std::pair<std::vector<int>, int> fibers_by_key(const JointTable& joint,
                                               const std::function<std::uint64_t(const JointState&)>& key) {
  std::vector<int> fiber_of(static_cast<std::size_t>(joint.size()));
  std::unordered_map<std::uint64_t, int> ids;
  int count = 0;
  for (Index i = 0; i < joint.size(); ++i) {
    auto [it, fresh] = ids.try_emplace(key(joint.states[static_cast<std::size_t>(i)]), count);
    if (fresh) ++count;
    fiber_of[static_cast<std::size_t>(i)] = it->second;
  }
  return {std::move(fiber_of), count};
}

}  // namespace

double joint_entropy(const JointTable& joint, const VectorXd& f) {
  KahanSum mean;
  for (Index i = 0; i < joint.size(); ++i) mean.add(joint.probs[i] * f[i]);
  if (mean.value() <= 0) throw std::invalid_argument("joint_entropy: mu[f] must be positive");
  KahanSum e;
  for (Index i = 0; i < joint.size(); ++i)
    if (f[i] > 0) e.add(joint.probs[i] * f[i] * std::log(f[i] / mean.value()));
  return e.value();
}

double joint_avg_entropy_given_spin(const JointTable& joint, const VectorXd& f) {
  auto [fiber_of, count] =
      fibers_by_key(joint, [](const JointState& s) { return std::uint64_t(s.spin); });
  return fiber_entropy_sum(joint.probs, f, fiber_of, count);
}

double joint_avg_entropy_given_edges(const JointTable& joint, const VectorXd& f) {
  auto [fiber_of, count] =
      fibers_by_key(joint, [](const JointState& s) { return std::uint64_t(s.edge_set); });
  return fiber_entropy_sum(joint.probs, f, fiber_of, count);
}

double joint_avg_entropy_given_outside_and_edges(const JointTable& joint,
                                                 const std::vector<int>& cls, const VectorXd& f) {
  const GibbsTable& spin = *joint.spin_table;
  auto [fiber_of, count] = fibers_by_key(joint, [&](const JointState& s) {
    std::uint64_t masked = mask_code(spin.codes[static_cast<std::size_t>(s.spin)], cls, spin.n(), spin.q());
    return masked * (std::uint64_t(1) << joint.num_edges) + s.edge_set;
  });
  return fiber_entropy_sum(joint.probs, f, fiber_of, count);
}

double joint_avg_entropy_given_outside(const JointTable& joint, const std::vector<int>& cls,
                                       const VectorXd& f) {
  const GibbsTable& spin = *joint.spin_table;
  auto [fiber_of, count] = fibers_by_key(joint, [&](const JointState& s) {
    return mask_code(spin.codes[static_cast<std::size_t>(s.spin)], cls, spin.n(), spin.q());
  });
  return fiber_entropy_sum(joint.probs, f, fiber_of, count);
}

VectorXd joint_spin_projection(const JointTable& joint, const VectorXd& f) {
  VectorXd num = VectorXd::Zero(joint.spin_table->size());
  VectorXd den = VectorXd::Zero(joint.spin_table->size());
  for (Index i = 0; i < joint.size(); ++i) {
    num[joint.states[static_cast<std::size_t>(i)].spin] += joint.probs[i] * f[i];
    den[joint.states[static_cast<std::size_t>(i)].spin] += joint.probs[i];
  }
  VectorXd g(num.size());
  for (Index s = 0; s < num.size(); ++s) g[s] = den[s] > 0 ? num[s] / den[s] : 0;
  return g;
}

SpinEdgeFactorization spin_edge_factorization(const JointTable& joint,
                                              const std::vector<VectorXd>& fs) {
  SpinEdgeFactorization out;
  for (const VectorXd& f : fs) {
    double lhs = joint_entropy(joint, f);
    if (lhs < 1e-13) {
      ++out.skipped;
      continue;
    }
    double rhs = joint_avg_entropy_given_spin(joint, f) + joint_avg_entropy_given_edges(joint, f);
    if (rhs <= 0) {
      ++out.skipped;
      continue;
    }
    ++out.used;
    double ratio = lhs / rhs;
    if (ratio > out.C_lower) {
      out.C_lower = ratio;
      out.worst_f = f;
      out.witness_lhs = lhs;
      out.witness_rhs = rhs;
    }
  }
  return out;
}

KPartiteJointReport kpartite_joint_checks(const JointTable& joint, const Partition& partition,
                                          const std::vector<VectorXd>& fs) {
  KPartiteJointReport out;
  out.lemma_mono_min_margin = std::numeric_limits<double>::infinity();
  out.composed_min_margin = std::numeric_limits<double>::infinity();
  const int k = partition.k();
  double d1 = std::numeric_limits<double>::infinity();
  double d2 = std::numeric_limits<double>::infinity();
  struct Terms {
    double ent, spin, edge;
    std::vector<double> outside, outside_edges;
  };
  std::vector<Terms> terms;
  for (const VectorXd& f : fs) {
    double ent = joint_entropy(joint, f);
    if (ent < 1e-13) {
      ++out.skipped;
      continue;
    }
    ++out.used;
    Terms t;
    t.ent = ent;
    t.spin = joint_avg_entropy_given_spin(joint, f);
    t.edge = joint_avg_entropy_given_edges(joint, f);
    for (int j = 0; j < k; ++j) {
      t.outside.push_back(joint_avg_entropy_given_outside(joint, partition.classes[static_cast<std::size_t>(j)], f));
      t.outside_edges.push_back(
          joint_avg_entropy_given_outside_and_edges(joint, partition.classes[static_cast<std::size_t>(j)], f));
    }
    for (int j = 0; j < k; ++j) {
      out.lemma_mono_min_margin = std::min(out.lemma_mono_min_margin, t.edge - t.outside_edges[static_cast<std::size_t>(j)]);
      if (t.outside[static_cast<std::size_t>(j)] > 1e-13)
        d1 = std::min(d1, (t.spin + t.outside_edges[static_cast<std::size_t>(j)]) / t.outside[static_cast<std::size_t>(j)]);
    }
    double sum_outside = 0;
    for (double v : t.outside) sum_outside += v;
    d2 = std::min(d2, sum_outside / t.ent);
    terms.push_back(std::move(t));
  }
  out.delta1_hat = d1;
  out.delta2_hat = d2;
  if (std::isfinite(d1) && std::isfinite(d2)) {
    for (const Terms& t : terms)
      out.composed_min_margin =
          std::min(out.composed_min_margin, (t.spin + t.edge) - (d1 * d2 / k) * t.ent);
  }
  return out;
}

}  // namespace spinlab
