#pragma once

// Direct-definition metric implementations used only as test oracles. They
// share no code with the library.

#include <set>
#include <string>
#include <vector>

namespace flew::reference {

double ndcg(const std::vector<double>& ranked);
double average_precision(const std::vector<int>& ranked);
double recall_at_k(const std::vector<std::string>& ranked, const std::set<std::string>& relevant,
                   std::size_t k);
/// O(n^2) pair scan.
double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y);

struct F1 {
  double macro = 0.0;
  double weighted = 0.0;
};
F1 f1(const std::vector<std::string>& predicted, const std::vector<std::string>& gold,
      const std::vector<std::string>& labels);

}  // namespace flew::reference
