// Command-line front end: one subcommand per pipeline stage, "all" to run the
// whole chain, and "generate" to write a synthetic corpus with planted tasks.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "flew/pipeline.hpp"
#include "flew/synthetic.hpp"

namespace {

struct CommonFlags {
  std::string config = "flew.conf";
  std::optional<std::uint64_t> seed;
  std::string stage_dir;
};

flew::PipelineConfig resolve(const CommonFlags& flags) {
  auto cfg = flew::load_config(flags.config);
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.stage_dir.empty()) cfg.stage_dir = flags.stage_dir;
  return cfg;
}

void report(const flew::StageManifest& m) {
  std::cout << m.stage << ": " << (m.skipped ? "skipped (up to date)" : "done");
  std::cout << ", " << m.outputs.size() << " output(s)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flew: facet-weighted document embeddings from citation intents"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", flags.config, "pipeline config file")->capture_default_str();
    sub->add_option("--seed", flags.seed, "override the master seed");
    sub->add_option("--stage-dir", flags.stage_dir, "override the stage directory");
  };

  std::string selected;
  for (const auto& name : flew::stage_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " stage");
    add_common(sub);
    sub->callback([&selected, name] { selected = name; });
  }
  auto* all = app.add_subcommand("all", "run every stage in order");
  add_common(all);
  all->callback([&selected] { selected = "all"; });

  flew::SyntheticSpec spec;
  std::string out_dir = "synthetic";
  auto* gen = app.add_subcommand("generate", "write a synthetic corpus, tasks and config");
  gen->add_option("-o,--out", out_dir, "output directory")->capture_default_str();
  gen->add_option("--papers", spec.papers, "number of papers")->capture_default_str();
  gen->add_option("--communities", spec.communities, "communities per facet")->capture_default_str();
  gen->add_option("--seed", spec.seed, "generator seed")->capture_default_str();
  gen->callback([&selected] { selected = "generate"; });

  CLI11_PARSE(app, argc, argv);

  try {
    if (selected == "generate") {
      const auto corpus = flew::generate_synthetic_corpus(spec);
      const auto conf = flew::write_synthetic_corpus(corpus, out_dir);
      std::cout << "wrote " << corpus.papers.size() << " papers; config at " << conf.string() << '\n';
      return 0;
    }
    const auto cfg = resolve(flags);
    if (selected == "all") {
      for (const auto& m : flew::run_all(cfg)) report(m);
    } else {
      report(flew::run_stage(selected, cfg));
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
