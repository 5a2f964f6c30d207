#pragma once

#include <string>

#include "cltrojan/config.hpp"

namespace clt {

// Location of a named artifact inside the run's output directory.
std::string outPath(const RunConfig& rc, const std::string& name);

// Clean data per the [data] section: CIFAR files (optionally subset to the
// listed classes) or the deterministic synthetic generator.
LabeledDataset loadCleanTrain(const RunConfig& rc);
LabeledDataset loadCleanTest(const RunConfig& rc);

// Seeded labeled_per_class sample per class from the clean test split, used
// to fit the downstream classifier.
LabeledDataset finetuneLabeledSet(const RunConfig& rc, const LabeledDataset& test);

// Each command reads its inputs from files/config, writes its outputs plus a
// resolved config snapshot under out_dir, and prints a one-line summary.
// Errors surface as ConfigError / IoError / DivergenceError.
void cmdPoison(const RunConfig& rc);
void cmdPretrain(const RunConfig& rc);
void cmdFinetune(const RunConfig& rc);
void cmdEval(const RunConfig& rc);
void cmdEr(const RunConfig& rc);
void cmdBoundCheck(const RunConfig& rc);
void cmdDefendAc(const RunConfig& rc);
void cmdDefendStrip(const RunConfig& rc);
void cmdDefendAbl(const RunConfig& rc);
void cmdExportFeatures(const RunConfig& rc);
void cmdSweepMagnitude(const RunConfig& rc);
void cmdSweepRatio(const RunConfig& rc);

}  // namespace clt
