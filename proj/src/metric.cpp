#include "spinlab/metric.hpp"

#include <algorithm>
#include <cmath>

namespace spinlab {

double Metric::operator()(const Config& a, const Config& b) const {
  switch (kind) {
    case Kind::hamming:
      return double(spinlab::hamming(a, b));
    case Kind::weighted_hamming: {
      double d = 0;
      for (int i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) d += w[i];
      return d;
    }
    case Kind::custom: {
      auto lookup = [&](const Config& c) -> Index {
        std::uint64_t code = config_code(c, q);
        auto it = std::lower_bound(codes.begin(), codes.end(), code);
        if (it == codes.end() || *it != code)
          throw std::invalid_argument("custom metric: configuration outside carrier space");
        return it - codes.begin();
      };
      return D(lookup(a), lookup(b));
    }
  }
  return 0;
}

std::string Metric::describe() const {
  switch (kind) {
    case Kind::hamming: return "hamming";
    case Kind::weighted_hamming: return "weighted_hamming";
    case Kind::custom: return "custom(gamma=" + format_g17(gamma) + ")";
  }
  return "?";
}

Metric Metric::hamming() { return Metric{}; }

Metric Metric::weighted(VectorXd w) {
  if ((w.array() <= 0).any()) throw std::invalid_argument("weighted metric: weights must be positive");
  Metric m;
  m.kind = Kind::weighted_hamming;
  m.w = std::move(w);
  return m;
}

Metric Metric::custom(const GibbsTable& space, MatrixXd D, double gamma) {
  Metric m;
  m.kind = Kind::custom;
  m.D = std::move(D);
  m.codes = space.codes;
  m.q = space.q();
  m.gamma = gamma;
  if (m.D.rows() != Index(m.codes.size()) || m.D.cols() != Index(m.codes.size()))
    throw std::invalid_argument("custom metric: matrix shape mismatch");
  return m;
}

Metric Metric::random_gamma_equivalent(const GibbsTable& space, double gamma, Rng rng,
                                       double spread) {
  if (gamma < 1) throw std::invalid_argument("gamma must be >= 1");
  if (spread <= 0) spread = gamma;
  if (spread < 1 || spread > gamma)
    throw std::invalid_argument("spread must lie in [1, gamma]");
  const Index m = space.size();
  MatrixXd D = MatrixXd::Zero(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) {
      double dh = spinlab::hamming(space.states[static_cast<std::size_t>(i)], space.states[static_cast<std::size_t>(j)]);
      double v = rng.uniform(dh / spread, dh * spread);
      D(i, j) = D(j, i) = v;
    }
  // shortest-path closure keeps the gamma envelope and restores the triangle
  // inequality
  for (Index k = 0; k < m; ++k)
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < m; ++j)
        if (D(i, k) + D(k, j) < D(i, j)) D(i, j) = D(i, k) + D(k, j);
  return custom(space, std::move(D), gamma);
}

double lipschitz_constant(const Metric& m, const GibbsTable& space, const VectorXd& f) {
  double lip = 0;
  for (Index i = 0; i < space.size(); ++i)
    for (Index j = i + 1; j < space.size(); ++j) {
      double d = m(space.states[static_cast<std::size_t>(i)], space.states[static_cast<std::size_t>(j)]);
      if (d > 0) lip = std::max(lip, std::abs(f[i] - f[j]) / d);
    }
  return lip;
}

MetricCheck validate_metric(const Metric& m, const GibbsTable& space) {
  MetricCheck out;
  const Index n = space.size();
  MatrixXd D(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) D(i, j) = m(space.states[static_cast<std::size_t>(i)], space.states[static_cast<std::size_t>(j)]);
  auto fail = [&](const std::string& what, double v) {
    if (v > out.max_violation) {
      out.max_violation = v;
      out.what = what;
    }
    out.ok = false;
  };
  for (Index i = 0; i < n; ++i) {
    if (D(i, i) != 0) fail("identity", std::abs(D(i, i)));
    for (Index j = 0; j < n; ++j) {
      if (D(i, j) < 0) fail("nonnegativity", -D(i, j));
      if (i != j && D(i, j) <= 0) fail("indiscernibles", 1);
      if (std::abs(D(i, j) - D(j, i)) > 0) fail("symmetry", std::abs(D(i, j) - D(j, i)));
    }
  }
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < n; ++k)
      for (Index j = 0; j < n; ++j)
        if (D(i, j) > D(i, k) + D(k, j) + 1e-12)
          fail("triangle", D(i, j) - D(i, k) - D(k, j));
  if (m.gamma >= 1) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        double dh = spinlab::hamming(space.states[static_cast<std::size_t>(i)], space.states[static_cast<std::size_t>(j)]);
        if (D(i, j) > m.gamma * dh + 1e-12) fail("gamma upper", D(i, j) - m.gamma * dh);
        if (D(i, j) < dh / m.gamma - 1e-12) fail("gamma lower", dh / m.gamma - D(i, j));
      }
  }
  return out;
}

VectorXd lipschitz_projection(const Metric& m, const GibbsTable& space, const VectorXd& f) {
  const Index n = space.size();
  VectorXd g(n);
  for (Index i = 0; i < n; ++i) {
    double best = f[i];
    for (Index j = 0; j < n; ++j)
      best = std::min(best, f[j] + m(space.states[static_cast<std::size_t>(i)], space.states[static_cast<std::size_t>(j)]));
    g[i] = best;
  }
  return g;
}

}  // namespace spinlab
