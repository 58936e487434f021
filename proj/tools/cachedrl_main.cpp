#include "cachedrl/config.hpp"
#include "cachedrl/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string seeds_csv;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "key = value configuration file");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--seeds", args.seeds_csv, "comma-separated seed list override");
}

int run(const CommonArgs& args, const std::vector<std::string>& suites) {
  cachedrl::Config cfg = args.config_path.empty()
                             ? cachedrl::Config()
                             : cachedrl::Config::from_file(args.config_path);
  if (!args.seeds_csv.empty()) cfg.set("run.seeds", args.seeds_csv);
  std::vector<std::uint64_t> seeds = cfg.get_seeds("run.seeds");
  int rc = cachedrl::run_suite(cfg, suites, args.out_dir, seeds);
  std::string label;
  for (const auto& s : suites) label += (label.empty() ? "" : "+") + s;
  std::printf("%s -> %s (%s)\n", label.c_str(), args.out_dir.c_str(),
              rc == 0 ? "ok" : "FAILED");
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semantic-cache posterior sampling experiments"};
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    std::vector<std::string> suites;
    CommonArgs args;
  };
  std::vector<Entry> entries = {
      {"train", "online training: cached vs uncached", {"online"}, {}},
      {"offline", "offline conservative Q-learning comparison", {"offline"}, {}},
      {"validate-bound", "posterior divergence bound sweep", {"bound"}, {}},
      {"bench-latency", "virtual-clock latency report", {"latency"}, {}},
      {"ablate", "five-variant ablation grid", {"ablation"}, {}},
      {"adapt-prior", "few-shot prior adaptation demo", {"fewshot"}, {}},
      {"all",
       "every suite",
       {"online", "offline", "bound", "latency", "ablation", "fewshot"},
       {}},
  };
  for (auto& e : entries) {
    CLI::App* cmd = app.add_subcommand(e.name, e.help);
    add_common(cmd, e.args);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& e : entries) {
      if (app.got_subcommand(e.name)) return run(e.args, e.suites);
    }
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 2;
  }
  return 2;
}
