#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cltrojan/commands.hpp"
#include "cltrojan/errors.hpp"

namespace {

clt::RunConfig buildConfig(const std::string& configPath, const std::vector<std::string>& sets,
                           const std::string& outOverride, int threadsOverride) {
  clt::ConfigFile file = configPath.empty() ? clt::ConfigFile::parse("", "<defaults>")
                                            : clt::ConfigFile::load(configPath);
  for (const auto& s : sets) {
    const auto dot = s.find('.');
    const auto eq = s.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq)
      throw clt::ConfigError("--set expects section.key=value, got '" + s + "'");
    file.set(s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
  }
  clt::RunConfig rc = clt::runConfigFromFile(file);
  if (const char* env = std::getenv("CLTROJAN_OUT_DIR"); env && *env) rc.outDir = env;
  if (!outOverride.empty()) rc.outDir = outOverride;
  if (threadsOverride > 0) rc.threads = threadsOverride;
  clt::validateRunConfig(rc);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-trigger data poisoning for contrastive pre-training: "
               "pipeline, evaluation and defenses"};
  app.require_subcommand(1);

  std::string configPath, outDir, defendKind, sweepKind;
  int threads = 0;
  std::vector<std::string> sets;
  app.add_option("-c,--config", configPath, "run configuration (key=value with [sections])");
  app.add_option("-o,--out", outDir, "output directory (overrides config and CLTROJAN_OUT_DIR)");
  app.add_option("-t,--threads", threads, "worker cap; 1 keeps runs bit-reproducible");
  app.add_option("--set", sets, "override one config value as section.key=value");

  CLI::App* poison =
      app.add_subcommand("poison", "embed the spectral trigger and emit the released training set");
  CLI::App* pretrain =
      app.add_subcommand("pretrain", "self-supervised pre-training on the released dataset");
  CLI::App* finetune =
      app.add_subcommand("finetune", "fit the downstream classifier on a small labeled set");
  CLI::App* eval = app.add_subcommand("eval", "clean accuracy and attack success rate");
  CLI::App* er = app.add_subcommand("er", "entanglement ratio across probe magnitudes");
  CLI::App* bound =
      app.add_subcommand("bound-check", "Monte-Carlo verification of the alignment lower bound");
  CLI::App* defend = app.add_subcommand("defend", "detection analyses against the poisoned run");
  defend->add_option("kind", defendKind, "ac | strip | abl")->required();
  CLI::App* exportF =
      app.add_subcommand("export-features", "encoder features of clean and triggered inputs");
  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweeps emitting CSV + plots");
  sweep->add_option("kind", sweepKind, "magnitude | ratio")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const clt::RunConfig rc = buildConfig(configPath, sets, outDir, threads);
    if (poison->parsed()) clt::cmdPoison(rc);
    else if (pretrain->parsed()) clt::cmdPretrain(rc);
    else if (finetune->parsed()) clt::cmdFinetune(rc);
    else if (eval->parsed()) clt::cmdEval(rc);
    else if (er->parsed()) clt::cmdEr(rc);
    else if (bound->parsed()) clt::cmdBoundCheck(rc);
    else if (defend->parsed()) {
      if (defendKind == "ac") clt::cmdDefendAc(rc);
      else if (defendKind == "strip") clt::cmdDefendStrip(rc);
      else if (defendKind == "abl") clt::cmdDefendAbl(rc);
      else throw clt::ConfigError("defend: unknown kind '" + defendKind + "' (ac|strip|abl)");
    } else if (exportF->parsed()) {
      clt::cmdExportFeatures(rc);
    } else if (sweep->parsed()) {
      if (sweepKind == "magnitude") clt::cmdSweepMagnitude(rc);
      else if (sweepKind == "ratio") clt::cmdSweepRatio(rc);
      else throw clt::ConfigError("sweep: unknown kind '" + sweepKind + "' (magnitude|ratio)");
    }
    return 0;
  } catch (const clt::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const clt::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const clt::DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
