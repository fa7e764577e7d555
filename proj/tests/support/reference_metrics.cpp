#include "support/reference_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flew::reference {

namespace {
double dcg(const std::vector<double>& rel) {
  double s = 0.0;
  for (std::size_t i = 0; i < rel.size(); ++i) s += rel[i] / std::log2(static_cast<double>(i) + 2.0);
  return s;
}
}  // namespace

double ndcg(const std::vector<double>& ranked) {
  // Ideal DCG by exhaustive search over orderings.
  std::vector<double> perm = ranked;
  std::sort(perm.begin(), perm.end());
  double best = 0.0;
  do {
    best = std::max(best, dcg(perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best == 0.0 ? 0.0 : dcg(ranked) / best;
}

double average_precision(const std::vector<int>& ranked) {
  double total = 0.0;
  int relevant = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (!ranked[i]) continue;
    int hits = 0;
    for (std::size_t j = 0; j <= i; ++j) hits += ranked[j] ? 1 : 0;
    total += static_cast<double>(hits) / static_cast<double>(i + 1);
    ++relevant;
  }
  return relevant == 0 ? 0.0 : total / relevant;
}

double recall_at_k(const std::vector<std::string>& ranked, const std::set<std::string>& relevant,
                   std::size_t k) {
  if (relevant.empty()) throw std::invalid_argument("empty relevant set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) hits += relevant.count(ranked[i]);
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++ties_x;
      if (dy == 0.0) ++ties_y;
      if (dx == 0.0 || dy == 0.0) continue;
      if ((dx > 0) == (dy > 0)) ++concordant;
      else ++discordant;
    }
  }
  const double n0 = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double denom = std::sqrt((n0 - ties_x) * (n0 - ties_y));
  if (denom == 0.0) throw std::invalid_argument("all ties");
  return static_cast<double>(concordant - discordant) / denom;
}

F1 f1(const std::vector<std::string>& predicted, const std::vector<std::string>& gold,
      const std::vector<std::string>& labels) {
  F1 out;
  double macro_sum = 0.0;
  int macro_count = 0;
  double weighted_sum = 0.0;
  for (const auto& label : labels) {
    int tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool p = predicted[i] == label;
      const bool g = gold[i] == label;
      if (g) ++support;
      if (p && g) ++tp;
      if (p && !g) ++fp;
      if (!p && g) ++fn;
    }
    if (tp + fp + fn == 0) continue;
    const double precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    const double recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    const double f = precision + recall == 0.0 ? 0.0 : 2 * precision * recall / (precision + recall);
    macro_sum += f;
    ++macro_count;
    weighted_sum += f * support;
  }
  out.macro = macro_count == 0 ? 0.0 : macro_sum / macro_count;
  out.weighted = gold.empty() ? 0.0 : weighted_sum / static_cast<double>(gold.size());
  return out;
}

}  // namespace flew::reference
