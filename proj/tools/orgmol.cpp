#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "orgmol/cli/driver.hpp"

namespace {

using orgmol::cli::RunConfig;

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  bool seed_set = false;
  std::uint64_t seed = 0;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_flag = true) {
  cmd->add_option("--out", opts.out_dir, "output directory")->required();
  if (config_flag)
    cmd->add_option("--config", opts.config_path, "key-value config file");
  cmd->add_option("--seed", opts.seed, "random seed")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--threads", opts.threads, "worker thread cap");
}

// A seed given via --seed or a config file wins over ORGMOL_SEED.
bool config_sets_seed(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (ls >> key && key == "seed") return true;
  }
  return false;
}

RunConfig resolve(const CommonOpts& opts) {
  RunConfig cfg;
  bool seeded = false;
  if (!opts.config_path.empty()) {
    orgmol::cli::load_config_file(cfg, opts.config_path);
    seeded = config_sets_seed(opts.config_path);
  }
  if (opts.seed_set) {
    cfg.seed = opts.seed;
    seeded = true;
  }
  orgmol::cli::apply_seed_fallback(cfg, seeded);
  if (opts.threads > 0) cfg.threads = opts.threads;
  if (cfg.threads < 1) cfg.threads = 1;
  return cfg;
}

void dump_config(const RunConfig& cfg) {
  std::cerr << "effective config:\n";
  for (const auto& [k, v] : orgmol::cli::detail::config_schema(cfg))
    std::cerr << "  " << k << " " << v << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fragment-level molecular generation pipeline"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string data_path, vocab_path, diff_path, bond_path;
  std::string generated_path, train_path;
  int n = 1000;
  int n_requested = 0;
  int size = 100;
  double threshold = -1.0;
  std::string mode;

  CLI::App* bv = app.add_subcommand("build-vocab", "learn a fragment vocabulary");
  bv->add_option("--data", data_path, "SMILES file, one molecule per line")
      ->required();
  bv->add_option("--size", size, "target vocabulary size");
  add_common(bv, opts);

  CLI::App* td = app.add_subcommand("train-diffusion",
                                    "train the coarse-grained score networks");
  td->add_option("--data", data_path, "SMILES file")->required();
  td->add_option("--vocab", vocab_path, "vocabulary file")->required();
  add_common(td, opts);

  CLI::App* tb = app.add_subcommand("train-bonds", "train the bond scorer");
  tb->add_option("--data", data_path, "SMILES file")->required();
  tb->add_option("--vocab", vocab_path, "vocabulary file")->required();
  add_common(tb, opts);

  CLI::App* sm = app.add_subcommand("sample", "sample and assemble molecules");
  sm->add_option("--diffusion-ckpt", diff_path, "diffusion checkpoint")
      ->required();
  sm->add_option("--bond-ckpt", bond_path, "bond scorer checkpoint")->required();
  sm->add_option("--vocab", vocab_path, "vocabulary file")->required();
  sm->add_option("--n", n, "number of samples");
  sm->add_option("--threshold", threshold, "bond score acceptance threshold");
  sm->add_option("--mode", mode, "scored | random-ablation");
  add_common(sm, opts);

  CLI::App* ev = app.add_subcommand("evaluate", "report metrics for a sample file");
  ev->add_option("--generated", generated_path, "generated SMILES file")
      ->required();
  ev->add_option("--train", train_path, "training SMILES file")->required();
  ev->add_option("--vocab", vocab_path, "vocabulary file")->required();
  ev->add_option("--n-requested", n_requested,
                 "requested sample count, for validity accounting");
  add_common(ev, opts);

  CLI11_PARSE(app, argc, argv);

  return orgmol::cli::guarded(
      [&]() -> int {
        RunConfig cfg = resolve(opts);
        if (bv->parsed()) cfg.vocab_size = size;
        if (sm->parsed()) {
          if (threshold >= 0.0) cfg.threshold = threshold;
          if (!mode.empty()) cfg.mode = mode;
        }
        dump_config(cfg);
        if (bv->parsed())
          return orgmol::cli::cmd_build_vocab(data_path, cfg, opts.out_dir,
                                              std::cerr);
        if (td->parsed())
          return orgmol::cli::cmd_train_diffusion(data_path, vocab_path, cfg,
                                                  opts.out_dir, std::cerr);
        if (tb->parsed())
          return orgmol::cli::cmd_train_bonds(data_path, vocab_path, cfg,
                                              opts.out_dir, std::cerr);
        if (sm->parsed())
          return orgmol::cli::cmd_sample(diff_path, bond_path, vocab_path, n,
                                         cfg, opts.out_dir, std::cerr);
        return orgmol::cli::cmd_evaluate(generated_path, train_path, vocab_path,
                                         n_requested, cfg, opts.out_dir,
                                         std::cerr);
      },
      std::cerr);
}
