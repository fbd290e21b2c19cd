// Command-line front end: train / ablate / compare-disc / export-emb /
// gradcheck over a flat "key = value" config with --set overrides.
//
// Exit codes: 0 ok, 1 bad config or usage, 2 runtime failure (including a
// non-finite value or a failed gradient check), 3 file I/O failure.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tda/experiment.hpp"
#include "tda/kernels.hpp"
#include "tda/loss_gradcheck.hpp"

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

tda::ExperimentConfig load_config(const std::string& config_path,
                                  const std::vector<std::string>& sets,
                                  const std::string& seeds, const std::string& out_dir) {
  std::map<std::string, std::string> kv;
  if (!config_path.empty()) kv = tda::read_config_file(config_path);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw tda::ConfigError("--set wants key=value, got '" + s + "'");
    kv[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  if (!seeds.empty()) kv["seeds"] = seeds;
  if (!out_dir.empty()) kv["out"] = out_dir;
  return tda::parse_experiment_config(kv);
}

void print_summary(const tda::ArmSummary& s) {
  std::printf("%-8s target %.4f +- %.4f   source %.4f +- %.4f   (%zu seeds)\n",
              s.arm.c_str(), s.target_mean, s.target_std, s.source_mean, s.source_std,
              s.seeds.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial domain adaptation with a task discriminator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, seeds, out_dir, backend;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "config file, one 'key = value' per line");
  app.add_option("--set", sets, "override one config key (key=value, repeatable)");
  app.add_option("--seed", seeds, "comma-separated seed list override");
  app.add_option("--out", out_dir, "output directory override");
  app.add_option("--backend", backend, "kernel backend")
      ->check(CLI::IsMember({"serial", "openmp"}));

  auto* cmd_train = app.add_subcommand("train", "train every seed of one configuration");
  auto* cmd_ablate =
      app.add_subcommand("ablate", "regularizer ablation: full, wo-s, wo-t, wo-st");
  auto* cmd_compare = app.add_subcommand(
      "compare-disc", "task discriminator vs binary domain discriminator");

  auto* cmd_export =
      app.add_subcommand("export-emb", "dump mean-latent embeddings from a checkpoint");
  std::string ckpt_path, emb_path = "embeddings.csv";
  cmd_export->add_option("--checkpoint", ckpt_path, "checkpoint to load")->required();
  cmd_export->add_option("--emb-out", emb_path, "destination csv");

  auto* cmd_gradcheck =
      app.add_subcommand("gradcheck", "finite-difference check of every loss term");
  int gc_cases = 12;
  double gc_tol = 1e-4;
  std::uint64_t gc_seed = 1234;
  cmd_gradcheck->add_option("--cases", gc_cases, "checks per loss term");
  cmd_gradcheck->add_option("--tol", gc_tol, "max allowed relative error");
  cmd_gradcheck->add_option("--gc-seed", gc_seed, "configuration draw seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }

  try {
    if (!backend.empty())
      tda::kernels::set_backend(backend == "serial" ? tda::kernels::Backend::serial
                                                    : tda::kernels::Backend::openmp);

    if (*cmd_gradcheck) {
      const tda::LossCheckReport rep = tda::run_loss_gradchecks(gc_cases, gc_tol, gc_seed);
      std::map<std::string, double> worst;
      for (const auto& c : rep.cases)
        if (c.max_rel_err > worst[c.loss]) worst[c.loss] = c.max_rel_err;
      for (const auto& [loss, err] : worst)
        std::printf("%-16s worst rel err %.3e\n", loss.c_str(), err);
      std::printf("%d/%d checks within %.1e (worst %.3e)\n", rep.total - rep.failed,
                  rep.total, rep.tolerance, rep.worst_rel_err);
      if (rep.failed > 0) {
        std::fprintf(stderr, "gradcheck failed\n");
        return 2;
      }
      return 0;
    }

    const tda::ExperimentConfig cfg = load_config(config_path, sets, seeds, out_dir);

    if (*cmd_train) {
      const tda::ArmSummary s = tda::run_experiment_arm(cfg, "run", true);
      tda::write_summary_csv(cfg.out_dir + "/summary.csv", {s});
      print_summary(s);
    } else if (*cmd_ablate) {
      for (const auto& s : tda::run_ablation_suite(cfg, true)) print_summary(s);
    } else if (*cmd_compare) {
      for (const auto& s : tda::run_discriminator_comparison(cfg, true)) print_summary(s);
    } else if (*cmd_export) {
      const tda::Model m = tda::load_model(ckpt_path);
      auto [source, target] = tda::build_datasets(cfg, cfg.seeds.front());
      tda::export_embedding_csv(emb_path, m, source, target);
      std::printf("wrote %s\n", emb_path.c_str());
    }
    return 0;
  } catch (const tda::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const tda::IoError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
