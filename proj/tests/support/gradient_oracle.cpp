#include "support/gradient_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace flew::reference {

namespace {
std::vector<double> project(const std::vector<double>& w, std::size_t dim, std::size_t buckets,
                            const SparseFeatures& x) {
  std::vector<double> out(dim, 0.0);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t j = 0; j < x.index.size(); ++j) out[r] += w[r * buckets + x.index[j]] * x.value[j];
  }
  return out;
}

double dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}
}  // namespace

double triplet_loss_forward(const std::vector<double>& weights, std::size_t dim, std::size_t buckets,
                            const TripletFeatures& f, double margin) {
  const auto q = project(weights, dim, buckets, f.query);
  const auto p = project(weights, dim, buckets, f.positive);
  const auto n = project(weights, dim, buckets, f.negative);
  return std::max(dist(q, p) - dist(q, n) + margin, 0.0);
}

std::map<std::pair<std::size_t, std::uint32_t>, double> finite_difference_gradient(
    const EncoderParams& params, const TripletFeatures& f, double margin, double rel_step) {
  std::set<std::uint32_t> columns;
  for (const auto* x : {&f.query, &f.positive, &f.negative}) columns.insert(x->index.begin(), x->index.end());
  std::vector<double> w = params.weights;
  std::map<std::pair<std::size_t, std::uint32_t>, double> grad;
  for (std::size_t r = 0; r < params.dim; ++r) {
    for (std::uint32_t c : columns) {
      double& cell = w[r * params.buckets + c];
      const double original = cell;
      const double h = rel_step * std::max(1.0, std::abs(original));
      cell = original + h;
      const double up = triplet_loss_forward(w, params.dim, params.buckets, f, margin);
      cell = original - h;
      const double down = triplet_loss_forward(w, params.dim, params.buckets, f, margin);
      cell = original;
      grad[{r, c}] = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

}  // namespace flew::reference
