#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Index = std::int64_t;

// Spin configuration on the interior vertices, spins 0-based internally
// (1..q in all file formats and reports).
using Config = Eigen::VectorXi;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Resource guards for enumeration-based operations. Values overridable via
// SPINLAB_STATE_CAP / SPINLAB_PINNING_CAP / SPINLAB_PAIR_CAP environment vars.
struct Caps {
  Index state_cap = Index(1) << 24;  // max states in one enumeration
  Index pinning_cap = 2000000;       // max pinnings in an exhaustive sweep
  Index pair_state_cap = 1500;       // max |Omega| for all-pairs transport sweeps
  int pinning_sample = 200;          // pinnings drawn in sampled mode
  bool allow_sampled = true;

  static Caps from_env();
};

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

inline double tv_distance(const VectorXd& p, const VectorXd& q) {
  return 0.5 * (p - q).cwiseAbs().sum();
}

inline int hamming(const Config& a, const Config& b) {
  return int((a.array() != b.array()).count());
}

// Mixed-radix encoding with vertex 0 as the most significant digit, so that
// ascending codes enumerate configurations in lexicographic order.
std::uint64_t config_code(const Config& c, int q);
Config config_from_code(std::uint64_t code, int n, int q);
// Zero out the digits of the vertices in `verts` (used to key fibers).
std::uint64_t mask_code(std::uint64_t code, const std::vector<int>& verts, int n, int q);

double binomial(int n, int k);
void for_each_combination(int n, int k, const std::function<void(const std::vector<int>&)>& fn);
std::vector<std::vector<int>> all_combinations(int n, int k);

std::string format_g17(double x);

}  // namespace spinlab
