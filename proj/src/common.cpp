#include "spinlab/common.hpp"

#include <cstdio>
#include <cstdlib>

namespace spinlab {

Caps Caps::from_env() {
  Caps c;
  if (const char* v = std::getenv("SPINLAB_STATE_CAP")) c.state_cap = std::atoll(v);
  if (const char* v = std::getenv("SPINLAB_PINNING_CAP")) c.pinning_cap = std::atoll(v);
  if (const char* v = std::getenv("SPINLAB_PAIR_CAP")) c.pair_state_cap = std::atoll(v);
  return c;
}

std::uint64_t config_code(const Config& c, int q) {
  std::uint64_t code = 0;
  for (int i = 0; i < c.size(); ++i) code = code * std::uint64_t(q) + std::uint64_t(c[i]);
  return code;
}

Config config_from_code(std::uint64_t code, int n, int q) {
  Config c(n);
  for (int i = n - 1; i >= 0; --i) {
    c[i] = int(code % std::uint64_t(q));
    code /= std::uint64_t(q);
  }
  return c;
}

std::uint64_t mask_code(std::uint64_t code, const std::vector<int>& verts, int n, int q) {
  // digit of vertex i has place value q^{n-1-i}
  for (int v : verts) {
    std::uint64_t place = 1;
    for (int i = 0; i < n - 1 - v; ++i) place *= std::uint64_t(q);
    std::uint64_t digit = (code / place) % std::uint64_t(q);
    code -= digit * place;
  }
  return code;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

void for_each_combination(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  if (k < 0 || k > n) return;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  while (true) {
    fn(c);
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

std::vector<std::vector<int>> all_combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  for_each_combination(n, k, [&](const std::vector<int>& c) { out.push_back(c); });
  return out;
}

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace spinlab
