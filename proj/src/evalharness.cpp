#include "flew/evalharness.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "json.hpp"

namespace flew {

using nlohmann::json;

double ndcg(std::span<const double> ranked_relevances) {
  auto dcg = [](std::span<const double> rels) {
    double s = 0.0;
    for (std::size_t i = 0; i < rels.size(); ++i) {
      s += rels[i] / std::log2(static_cast<double>(i) + 2.0);
    }
    return s;
  };
  std::vector<double> ideal(ranked_relevances.begin(), ranked_relevances.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg(ideal);
  if (idcg <= 0.0) return 0.0;
  return dcg(ranked_relevances) / idcg;
}

double average_precision(std::span<const int> ranked_binary) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked_binary.size(); ++i) {
    if (ranked_binary[i] == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

double recall_at_k(std::span<const PaperId> ranked, const std::set<PaperId>& relevant,
                   std::size_t k) {
  if (k == 0) throw Error("recall_at_k: k must be >= 1");
  if (relevant.empty()) throw Error("recall_at_k: empty relevant set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) hits += relevant.contains(ranked[i]);
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

namespace {

// Number of pairs i < j with v[i] > v[j]; sorts v.
std::uint64_t count_inversions(std::vector<double>& v, std::vector<double>& buf) {
  std::uint64_t swaps = 0;
  const std::size_t n = v.size();
  buf.resize(n);
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += mid - i;
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    std::swap(v, buf);
  }
  return swaps;
}

// Sum over runs of equal values of t(t-1)/2, for a sorted sequence.
template <typename It, typename Eq>
std::uint64_t tied_pairs(It first, It last, Eq eq) {
  std::uint64_t total = 0;
  while (first != last) {
    auto run_end = std::find_if_not(first, last, [&](const auto& v) { return eq(*first, v); });
    const auto t = static_cast<std::uint64_t>(std::distance(first, run_end));
    total += t * (t - 1) / 2;
    first = run_end;
  }
  return total;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("kendall_tau: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw Error("kendall_tau: need at least two observations");

  std::vector<std::pair<double, double>> pairs(n);
  for (std::size_t i = 0; i < n; ++i) pairs[i] = {x[i], y[i]};
  std::sort(pairs.begin(), pairs.end());

  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t tx =
      tied_pairs(pairs.begin(), pairs.end(), [](auto& a, auto& b) { return a.first == b.first; });
  const std::uint64_t txy = tied_pairs(pairs.begin(), pairs.end(), [](auto& a, auto& b) { return a == b; });

  std::vector<double> ys(n), buf;
  for (std::size_t i = 0; i < n; ++i) ys[i] = pairs[i].second;
  const std::uint64_t discordant = count_inversions(ys, buf);
  const std::uint64_t ty = tied_pairs(ys.begin(), ys.end(), [](double a, double b) { return a == b; });

  if (tx == n0 || ty == n0) throw Error("kendall_tau: all values tied in one input");
  // concordant - discordant = n0 - tx - ty + txy - 2 * discordant
  const double numerator = static_cast<double>(n0) - static_cast<double>(tx) -
                           static_cast<double>(ty) + static_cast<double>(txy) -
                           2.0 * static_cast<double>(discordant);
  return numerator / std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
}

F1Scores f1_scores(std::span<const std::string> predicted, std::span<const std::string> gold,
                   std::span<const std::string> label_set) {
  if (predicted.size() != gold.size()) throw Error("f1_scores: length mismatch");
  struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
  };
  std::map<std::string, Counts, std::less<>> counts;
  for (const auto& l : label_set) counts[l];
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto pit = counts.find(predicted[i]);
    auto git = counts.find(gold[i]);
    if (pit == counts.end() || git == counts.end()) {
      throw Error("f1_scores: label outside the label set");
    }
    if (predicted[i] == gold[i]) {
      ++pit->second.tp;
    } else {
      ++pit->second.fp;
      ++git->second.fn;
    }
  }
  F1Scores out;
  std::size_t present = 0;
  double weight_total = 0.0;
  for (const auto& [label, c] : counts) {
    if (c.tp + c.fp + c.fn == 0) continue;
    const double p = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    const double r = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    const double f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    const auto support = static_cast<double>(c.tp + c.fn);
    out.macro += f1;
    out.weighted += support * f1;
    weight_total += support;
    ++present;
  }
  if (present > 0) out.macro /= static_cast<double>(present);
  if (weight_total > 0.0) out.weighted /= weight_total;
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("cosine_similarity: dimension mismatch");
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

std::vector<std::string> knn_classify(std::span<const LabeledPoint> train,
                                      std::span<const std::vector<double>> test, std::size_t k) {
  if (train.empty()) throw Error("knn_classify: empty training set");
  if (k == 0) throw Error("knn_classify: k must be >= 1");
  std::vector<std::string> out;
  out.reserve(test.size());
  std::vector<std::pair<double, std::size_t>> scored(train.size());
  for (const auto& x : test) {
    for (std::size_t i = 0; i < train.size(); ++i) {
      scored[i] = {1.0 - cosine_similarity(x, train[i].vector), i};
    }
    std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return train[a.second].id < train[b.second].id;
    });
    const std::size_t kk = std::min(k, scored.size());
    std::map<std::string_view, std::size_t> votes;
    for (std::size_t i = 0; i < kk; ++i) ++votes[train[scored[i].second].label];
    std::size_t best = 0;
    for (const auto& [_, v] : votes) best = std::max(best, v);
    // First neighbor (in rank order) whose label has the top vote count.
    for (std::size_t i = 0; i < kk; ++i) {
      const auto& label = train[scored[i].second].label;
      if (votes[label] == best) {
        out.push_back(label);
        break;
      }
    }
  }
  return out;
}

std::vector<double> linear_probe(std::span<const std::vector<double>> train_x,
                                 std::span<const double> train_y,
                                 std::span<const std::vector<double>> test_x, double ridge) {
  if (train_x.empty()) throw Error("linear_probe: empty training set");
  if (train_x.size() != train_y.size()) throw Error("linear_probe: length mismatch");
  const std::size_t n = train_x.size();
  const std::size_t d = train_x.front().size();

  // Means are anchored at the first sample so constant columns center to exactly 0.
  auto anchored_mean = [n](auto&& value_at) {
    const double anchor = value_at(0);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += value_at(i) - anchor;
    return anchor + s / static_cast<double>(n);
  };
  Eigen::VectorXd x_mean(d);
  for (std::size_t j = 0; j < d; ++j) {
    x_mean[static_cast<Eigen::Index>(j)] = anchored_mean([&](std::size_t i) {
      if (train_x[i].size() != d) throw Error("linear_probe: ragged embeddings");
      return train_x[i][j];
    });
  }
  const double y_mean = anchored_mean([&](std::size_t i) { return train_y[i]; });

  Eigen::MatrixXd xc(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Eigen::VectorXd yc(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      xc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          train_x[i][j] - x_mean[static_cast<Eigen::Index>(j)];
    }
    yc[static_cast<Eigen::Index>(i)] = train_y[i] - y_mean;
  }
  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += ridge;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw Error("linear_probe: singular normal equations");
  const Eigen::VectorXd w = llt.solve(xc.transpose() * yc);
  if (!w.allFinite()) throw Error("linear_probe: non-finite solution");

  std::vector<double> out;
  out.reserve(test_x.size());
  for (const auto& x : test_x) {
    if (x.size() != d) throw Error("linear_probe: test dimension mismatch");
    double pred = y_mean;
    for (std::size_t j = 0; j < d; ++j) {
      pred += (x[j] - x_mean[static_cast<Eigen::Index>(j)]) * w[static_cast<Eigen::Index>(j)];
    }
    out.push_back(pred);
  }
  return out;
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::proximity: return "proximity";
    case TaskKind::classification: return "classification";
    case TaskKind::regression_probe: return "regression-probe";
    case TaskKind::retrieval: return "retrieval";
  }
  return "unknown";
}

namespace {

TaskKind parse_kind(const std::string& s) {
  for (auto k : {TaskKind::proximity, TaskKind::classification, TaskKind::regression_probe,
                 TaskKind::retrieval}) {
    if (s == to_string(k)) return k;
  }
  throw Error("unknown task kind '" + s + "'");
}

std::string default_metric(TaskKind kind) {
  switch (kind) {
    case TaskKind::proximity: return "map";
    case TaskKind::classification: return "macro_f1";
    case TaskKind::regression_probe: return "kendall_tau";
    case TaskKind::retrieval: return "map";
  }
  return "";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw Error("unknown split '" + s + "'");
}

const std::vector<double>& lookup(const EmbeddingMap& embeddings, std::string_view id) {
  auto it = embeddings.find(id);
  if (it == embeddings.end()) throw Error("run_task: no embedding for '" + std::string(id) + "'");
  return it->second;
}

}  // namespace

std::vector<PaperId> ValidationTask::referenced_ids() const {
  std::set<PaperId> ids;
  for (const auto& q : proximity) {
    ids.insert(q.query);
    for (const auto& c : q.candidates) ids.insert(c.id);
  }
  for (const auto& q : retrieval) {
    ids.insert(q.query);
    ids.insert(q.positives.begin(), q.positives.end());
    ids.insert(q.candidates.begin(), q.candidates.end());
  }
  for (const auto& d : labeled) ids.insert(d.id);
  for (const auto& d : targets) ids.insert(d.id);
  return {ids.begin(), ids.end()};
}

void ValidationTask::validate() const {
  const std::string where = "task '" + name + "': ";
  for (const auto& q : proximity) {
    for (const auto& c : q.candidates) {
      if (!(c.relevance >= 0.0)) throw Error(where + "negative relevance");
    }
  }
  std::set<PaperId> train_ids, test_ids;
  for (const auto& d : labeled) (d.split == Split::train ? train_ids : test_ids).insert(d.id);
  for (const auto& d : targets) (d.split == Split::train ? train_ids : test_ids).insert(d.id);
  for (const auto& id : test_ids) {
    if (train_ids.contains(id)) throw Error(where + "id '" + id + "' in both train and test");
  }
  const bool ok_metric =
      (kind == TaskKind::proximity && (metric == "map" || metric == "ndcg")) ||
      (kind == TaskKind::retrieval && (metric == "map" || metric == "recall@k")) ||
      (kind == TaskKind::classification && (metric == "macro_f1" || metric == "weighted_f1")) ||
      (kind == TaskKind::regression_probe && metric == "kendall_tau");
  if (!ok_metric) throw Error(where + "metric '" + metric + "' invalid for its kind");
  if (k == 0) throw Error(where + "k must be >= 1");
}

std::vector<PaperId> rank_candidates(std::span<const double> query,
                                     std::span<const PaperId> candidates,
                                     const EmbeddingMap& embeddings) {
  std::vector<std::pair<double, const PaperId*>> scored;
  scored.reserve(candidates.size());
  for (const auto& c : candidates) {
    scored.emplace_back(cosine_similarity(query, lookup(embeddings, c)), &c);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return *a.second < *b.second;
  });
  std::vector<PaperId> out;
  out.reserve(scored.size());
  for (const auto& [_, id] : scored) out.push_back(*id);
  return out;
}

MetricResult run_task(const ValidationTask& task, const EmbeddingMap& embeddings) {
  task.validate();
  MetricResult result{task.metric, 0.0, 0};
  switch (task.kind) {
    case TaskKind::proximity: {
      for (const auto& q : task.proximity) {
        std::vector<PaperId> ids;
        std::map<std::string_view, double> rel;
        for (const auto& c : q.candidates) {
          ids.push_back(c.id);
          rel[c.id] = c.relevance;
        }
        const auto ranked = rank_candidates(lookup(embeddings, q.query), ids, embeddings);
        if (task.metric == "ndcg") {
          std::vector<double> gains;
          for (const auto& id : ranked) gains.push_back(rel[id]);
          result.value += ndcg(gains);
        } else {
          std::vector<int> binary;
          for (const auto& id : ranked) binary.push_back(rel[id] > 0.0);
          result.value += average_precision(binary);
        }
        ++result.support;
      }
      break;
    }
    case TaskKind::retrieval: {
      const auto pool = task.referenced_ids();
      for (const auto& q : task.retrieval) {
        std::vector<PaperId> candidates = q.candidates.empty() ? pool : q.candidates;
        std::erase(candidates, q.query);
        const auto ranked = rank_candidates(lookup(embeddings, q.query), candidates, embeddings);
        const std::set<PaperId> relevant(q.positives.begin(), q.positives.end());
        if (task.metric == "recall@k") {
          result.value += recall_at_k(ranked, relevant, task.k);
        } else {
          std::vector<int> binary;
          for (const auto& id : ranked) binary.push_back(relevant.contains(id));
          result.value += average_precision(binary);
        }
        ++result.support;
      }
      break;
    }
    case TaskKind::classification: {
      std::vector<LabeledPoint> train;
      std::vector<std::vector<double>> test;
      std::vector<std::string> gold;
      std::set<std::string> labels;
      for (const auto& d : task.labeled) {
        labels.insert(d.label);
        if (d.split == Split::train) {
          train.push_back({d.id, lookup(embeddings, d.id), d.label});
        } else {
          test.push_back(lookup(embeddings, d.id));
          gold.push_back(d.label);
        }
      }
      const auto predicted = knn_classify(train, test, task.k);
      const std::vector<std::string> label_set(labels.begin(), labels.end());
      const auto f1 = f1_scores(predicted, gold, label_set);
      result.support = gold.size();
      result.value = task.metric == "weighted_f1" ? f1.weighted : f1.macro;
      return result;
    }
    case TaskKind::regression_probe: {
      std::vector<std::vector<double>> train_x, test_x;
      std::vector<double> train_y, test_y;
      for (const auto& d : task.targets) {
        if (d.split == Split::train) {
          train_x.push_back(lookup(embeddings, d.id));
          train_y.push_back(d.target);
        } else {
          test_x.push_back(lookup(embeddings, d.id));
          test_y.push_back(d.target);
        }
      }
      const auto predicted = linear_probe(train_x, train_y, test_x);
      result.value = kendall_tau(predicted, test_y);
      result.support = test_y.size();
      return result;
    }
  }
  if (result.support > 0) result.value /= static_cast<double>(result.support);
  return result;
}

ValidationTask read_task(std::istream& in) {
  ValidationTask task;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json obj = json::parse(line);
      if (!have_header) {
        task.kind = parse_kind(obj.at("kind").get<std::string>());
        task.name = obj.value("name", std::string("task"));
        task.metric = obj.value("metric", default_metric(task.kind));
        task.k = obj.value("k", task.kind == TaskKind::classification ? std::size_t{3}
                                                                      : std::size_t{5});
        have_header = true;
        continue;
      }
      switch (task.kind) {
        case TaskKind::proximity: {
          ProximityQuery q{obj.at("query").get<std::string>(), {}};
          for (const auto& c : obj.at("candidates")) {
            q.candidates.push_back({c.at("id").get<std::string>(), c.at("relevance").get<double>()});
          }
          task.proximity.push_back(std::move(q));
          break;
        }
        case TaskKind::retrieval:
          task.retrieval.push_back({obj.at("query").get<std::string>(),
                                    obj.at("positives").get<std::vector<std::string>>(),
                                    obj.value("candidates", std::vector<std::string>{})});
          break;
        case TaskKind::classification:
          task.labeled.push_back({obj.at("id").get<std::string>(),
                                  obj.at("label").get<std::string>(),
                                  parse_split(obj.at("split").get<std::string>())});
          break;
        case TaskKind::regression_probe:
          task.targets.push_back({obj.at("id").get<std::string>(), obj.at("target").get<double>(),
                                  parse_split(obj.at("split").get<std::string>())});
          break;
      }
    } catch (const json::exception& e) {
      throw Error("task line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw Error("task file has no header line");
  task.validate();
  return task;
}

void write_task(std::ostream& out, const ValidationTask& task) {
  out << json{{"kind", to_string(task.kind)}, {"name", task.name}, {"metric", task.metric},
              {"k", task.k}}
             .dump()
      << '\n';
  for (const auto& q : task.proximity) {
    json cands = json::array();
    for (const auto& c : q.candidates) cands.push_back({{"id", c.id}, {"relevance", c.relevance}});
    out << json{{"query", q.query}, {"candidates", cands}}.dump() << '\n';
  }
  for (const auto& q : task.retrieval) {
    json obj{{"query", q.query}, {"positives", q.positives}};
    if (!q.candidates.empty()) obj["candidates"] = q.candidates;
    out << obj.dump() << '\n';
  }
  auto split_name = [](Split s) { return s == Split::train ? "train" : "test"; };
  for (const auto& d : task.labeled) {
    out << json{{"id", d.id}, {"label", d.label}, {"split", split_name(d.split)}}.dump() << '\n';
  }
  for (const auto& d : task.targets) {
    out << json{{"id", d.id}, {"target", d.target}, {"split", split_name(d.split)}}.dump() << '\n';
  }
}

}  // namespace flew
