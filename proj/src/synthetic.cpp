#include "flew/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "flew/binary_io.hpp"
#include "flew/rng.hpp"

namespace flew {

namespace {

constexpr std::array<std::string_view, 16> kOnsets{"b", "d", "f", "g", "k", "l", "m", "n",
                                                   "p", "r", "s", "t", "v", "z", "ch", "sh"};
constexpr std::array<std::string_view, 6> kNuclei{"a", "e", "i", "o", "u", "ai"};
constexpr std::array<std::string_view, 12> kCommonWords{
    "the", "of", "and", "for", "with", "models", "data", "analysis", "systems", "large", "new", "task"};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

class Generator {
 public:
  explicit Generator(const SyntheticSpec& spec) : spec_(spec), rng_(derive_seed(spec.seed, "synthetic")) {}

  SyntheticCorpus run() {
    if (spec_.papers < 30 || spec_.communities < 2 || spec_.words_per_community < 2) {
      throw Error("synthetic spec too small");
    }
    build_vocabulary();
    SyntheticCorpus c;
    for (std::size_t i = 0; i < spec_.papers; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "P%04zu", i);
      c.ids.emplace_back(buf);
    }
    for (Facet f : kFacets) {
      auto& comm = c.community[index_of(f)];
      comm.resize(spec_.papers);
      for (std::size_t i = 0; i < spec_.papers; ++i) comm[i] = i % spec_.communities;
      rng_.shuffle(comm);
    }
    for (std::size_t i = 0; i < spec_.papers; ++i) c.papers.insert(make_paper(c, i));
    make_citations(c);
    make_tasks(c);
    return c;
  }

 private:
  std::string word(std::size_t facet, std::size_t comm) {
    const auto& v = vocab_[facet][comm];
    return v[rng_.uniform_index(v.size())];
  }
  std::string common() { return std::string(kCommonWords[rng_.uniform_index(kCommonWords.size())]); }
  // A token from another community of the same facet.
  std::string stray(std::size_t facet, std::size_t comm) {
    std::size_t other = rng_.uniform_index(spec_.communities - 1);
    if (other >= comm) ++other;
    return word(facet, other);
  }

  void build_vocabulary() {
    std::set<std::string> used(kCommonWords.begin(), kCommonWords.end());
    for (std::size_t f = 0; f < 3; ++f) {
      vocab_[f].resize(spec_.communities);
      for (std::size_t c = 0; c < spec_.communities; ++c) {
        while (vocab_[f][c].size() < spec_.words_per_community) {
          std::string w;
          for (int s = 0; s < 3; ++s) {
            w += kOnsets[rng_.uniform_index(kOnsets.size())];
            w += kNuclei[rng_.uniform_index(kNuclei.size())];
          }
          if (used.insert(w).second) vocab_[f][c].push_back(w);
        }
      }
    }
  }

  std::string sentence(std::size_t facet, std::size_t comm, std::string_view lead) {
    std::ostringstream s;
    s << lead;
    const std::size_t tokens = 5;
    for (std::size_t t = 0; t < tokens; ++t) {
      s << ' ';
      const double u = rng_.uniform01();
      if (u < 0.7) {
        s << word(facet, comm);
      } else if (u < 0.85) {
        s << common();
      } else {
        s << stray(facet, comm);
      }
    }
    s << '.';
    return s.str();
  }

  Paper make_paper(const SyntheticCorpus& c, std::size_t i) {
    const std::size_t bg = c.community[0][i], mt = c.community[1][i], rs = c.community[2][i];
    static constexpr std::array<std::string_view, 3> kBackgroundLeads{"Prior studies of", "Recent work on", "Many applications need"};
    static constexpr std::array<std::string_view, 3> kMethodLeads{"We propose", "We introduce", "Our method combines"};
    static constexpr std::array<std::string_view, 3> kResultLeads{"Results show", "Experiments demonstrate", "We find"};
    std::vector<std::string> sentences;
    auto lead = [&](const auto& leads) { return leads[rng_.uniform_index(leads.size())]; };
    for (std::size_t s = 0; s < spec_.sentences_per_section; ++s) sentences.push_back(sentence(0, bg, lead(kBackgroundLeads)));
    for (std::size_t s = 0; s < spec_.sentences_per_section; ++s) sentences.push_back(sentence(1, mt, lead(kMethodLeads)));
    for (std::size_t s = 0; s < spec_.sentences_per_section; ++s) sentences.push_back(sentence(2, rs, lead(kResultLeads)));
    std::string abstract;
    for (const auto& s : sentences) {
      if (!abstract.empty()) abstract += ' ';
      abstract += s;
    }
    std::string title = capitalize(word(1, mt)) + " " + common() + " " + word(0, bg) + " " + word(2, rs);
    return {c.ids[i], std::move(title), std::move(abstract)};
  }

  void make_citations(SyntheticCorpus& c) {
    for (Facet f : kFacets) {
      const auto& comm = c.community[index_of(f)];
      std::vector<std::vector<std::size_t>> members(spec_.communities);
      for (std::size_t i = 0; i < spec_.papers; ++i) members[comm[i]].push_back(i);
      for (std::size_t i = 0; i < spec_.papers; ++i) {
        std::set<std::size_t> targets;
        for (std::size_t attempt = 0; targets.size() < spec_.citations_per_facet && attempt < 64; ++attempt) {
          std::size_t t;
          if (rng_.uniform01() < spec_.off_community_rate) {
            t = rng_.uniform_index(spec_.papers);
          } else {
            const auto& m = members[comm[i]];
            t = m[rng_.uniform_index(m.size())];
          }
          if (t != i) targets.insert(t);
        }
        for (std::size_t t : targets) {
          const auto count = 1 + rng_.uniform_index(3);
          if (count == 3) {
            // Split over two dump lines; ingestion sums them back.
            c.citation_records.push_back({c.ids[i], c.ids[t], f, 1});
            c.citation_records.push_back({c.ids[i], c.ids[t], f, 2});
          } else {
            c.citation_records.push_back({c.ids[i], c.ids[t], f, count});
          }
        }
      }
    }
  }

  std::vector<std::size_t> pick(std::vector<std::size_t> pool, std::size_t n) {
    rng_.shuffle(pool);
    if (pool.size() > n) pool.resize(n);
    return pool;
  }

  void make_tasks(SyntheticCorpus& c) {
    std::vector<std::size_t> order(spec_.papers);
    for (std::size_t i = 0; i < spec_.papers; ++i) order[i] = i;
    rng_.shuffle(order);
    const std::size_t q = std::min(spec_.task_queries, spec_.papers / 2);
    const std::vector<std::size_t> val_q(order.begin(), order.begin() + static_cast<long>(q));
    const std::vector<std::size_t> test_q(order.begin() + static_cast<long>(q),
                                          order.begin() + static_cast<long>(2 * q));

    auto same = [&](std::size_t f, std::size_t a, std::size_t b) { return c.community[f][a] == c.community[f][b]; };
    auto facet_task = [&](std::size_t f, const std::vector<std::size_t>& queries) {
      ValidationTask task;
      task.name = std::string(short_name(kFacets[f])) + "_prx";
      task.kind = TaskKind::proximity;
      task.metric = "map";
      const std::size_t o1 = (f + 1) % 3, o2 = (f + 2) % 3;
      for (std::size_t qi : queries) {
        std::vector<std::size_t> rel, dis1, dis2;
        for (std::size_t j = 0; j < spec_.papers; ++j) {
          if (j == qi) continue;
          if (same(f, qi, j)) {
            if (!same(o1, qi, j) && !same(o2, qi, j)) rel.push_back(j);
          } else if (same(o1, qi, j)) {
            dis1.push_back(j);
          } else if (same(o2, qi, j)) {
            dis2.push_back(j);
          }
        }
        ProximityQuery pq{c.ids[qi], {}};
        for (std::size_t j : pick(rel, 5)) pq.candidates.push_back({c.ids[j], 1.0});
        for (std::size_t j : pick(dis1, 8)) pq.candidates.push_back({c.ids[j], 0.0});
        for (std::size_t j : pick(dis2, 8)) pq.candidates.push_back({c.ids[j], 0.0});
        std::sort(pq.candidates.begin(), pq.candidates.end(),
                  [](const auto& a, const auto& b) { return a.id < b.id; });
        task.proximity.push_back(std::move(pq));
      }
      return task;
    };
    auto mixed_task = [&](const std::vector<std::size_t>& queries) {
      ValidationTask task;
      task.name = "mixed_prx";
      task.kind = TaskKind::proximity;
      task.metric = "ndcg";
      for (std::size_t qi : queries) {
        std::vector<std::size_t> by_shared[4];
        for (std::size_t j = 0; j < spec_.papers; ++j) {
          if (j == qi) continue;
          const std::size_t shared = same(0, qi, j) + same(1, qi, j) + same(2, qi, j);
          by_shared[shared].push_back(j);
        }
        // One-facet matches are split evenly across facets.
        std::vector<std::size_t> one[3];
        for (std::size_t j : by_shared[1]) {
          for (std::size_t f = 0; f < 3; ++f) {
            if (same(f, qi, j)) one[f].push_back(j);
          }
        }
        ProximityQuery pq{c.ids[qi], {}};
        for (std::size_t j : pick(by_shared[3], 2)) pq.candidates.push_back({c.ids[j], 3.0});
        for (std::size_t j : pick(by_shared[2], 4)) pq.candidates.push_back({c.ids[j], 2.0});
        for (std::size_t f = 0; f < 3; ++f) {
          for (std::size_t j : pick(one[f], 3)) pq.candidates.push_back({c.ids[j], 1.0});
        }
        for (std::size_t j : pick(by_shared[0], 10)) pq.candidates.push_back({c.ids[j], 0.0});
        std::sort(pq.candidates.begin(), pq.candidates.end(),
                  [](const auto& a, const auto& b) { return a.id < b.id; });
        task.proximity.push_back(std::move(pq));
      }
      return task;
    };
    auto classification_task = [&](const std::vector<std::size_t>& test_docs) {
      ValidationTask task;
      task.name = "mt_clf";
      task.kind = TaskKind::classification;
      task.metric = "macro_f1";
      task.k = 5;
      const std::set<std::size_t> test_set(test_docs.begin(), test_docs.end());
      for (std::size_t j = 0; j < spec_.papers; ++j) {
        task.labeled.push_back({c.ids[j], "m" + std::to_string(c.community[1][j]),
                                test_set.contains(j) ? Split::test : Split::train});
      }
      return task;
    };
    auto regression_task = [&](const std::vector<std::size_t>& test_docs) {
      std::vector<double> in_citations(spec_.papers, 0.0);
      std::map<std::string_view, std::size_t> pos;
      for (std::size_t j = 0; j < spec_.papers; ++j) pos[c.ids[j]] = j;
      for (const auto& e : c.citation_records) in_citations[pos[e.cited]] += static_cast<double>(e.context_count);
      ValidationTask task;
      task.name = "cites_rgn";
      task.kind = TaskKind::regression_probe;
      task.metric = "kendall_tau";
      const std::set<std::size_t> test_set(test_docs.begin(), test_docs.end());
      for (std::size_t j = 0; j < spec_.papers; ++j) {
        task.targets.push_back({c.ids[j], in_citations[j], test_set.contains(j) ? Split::test : Split::train});
      }
      return task;
    };

    for (const auto* queries : {&val_q, &test_q}) {
      auto& out = queries == &val_q ? c.validation_tasks : c.test_tasks;
      for (std::size_t f = 0; f < 3; ++f) out.push_back(facet_task(f, *queries));
      out.push_back(mixed_task(*queries));
      out.push_back(classification_task(*queries));
      out.push_back(regression_task(*queries));
    }
  }

  const SyntheticSpec& spec_;
  Rng rng_;
  std::array<std::vector<std::vector<std::string>>, 3> vocab_;
};

}  // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticSpec& spec) {
  return Generator(spec).run();
}

std::filesystem::path write_synthetic_corpus(const SyntheticCorpus& corpus,
                                             const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "tasks");
  {
    std::ostringstream papers;
    write_papers_jsonl(papers, corpus.papers);
    io::write_text_file(dir / "papers.jsonl", papers.str());
  }
  {
    CitationGraph records;
    records.edges = corpus.citation_records;
    std::ostringstream cites;
    write_citations_jsonl(cites, records);
    io::write_text_file(dir / "citations.jsonl", cites.str());
  }
  std::string val_list, test_list;
  auto write_tasks = [&](const std::vector<ValidationTask>& tasks, const char* split, std::string& list) {
    for (const auto& t : tasks) {
      const fs::path rel = fs::path("tasks") / (t.name + "." + split + ".jsonl");
      std::ostringstream body;
      write_task(body, t);
      io::write_text_file(dir / rel, body.str());
      if (!list.empty()) list += ',';
      list += rel.string();
    }
  };
  write_tasks(corpus.validation_tasks, "val", val_list);
  write_tasks(corpus.test_tasks, "test", test_list);

  std::ostringstream conf;
  conf << "# Generated synthetic corpus; relative paths resolve against this file.\n"
       << "papers = papers.jsonl\n"
       << "citations = citations.jsonl\n"
       << "tasks.validation = " << val_list << "\n"
       << "tasks.test = " << test_list << "\n"
       << "seed = 1\n";
  const fs::path conf_path = dir / "flew.conf";
  io::write_text_file(conf_path, conf.str());
  return conf_path;
}

}  // namespace flew
