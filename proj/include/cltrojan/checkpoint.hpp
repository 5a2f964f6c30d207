#pragma once

#include <string>

#include "cltrojan/train.hpp"

namespace clt {

// Versioned little-endian binary: magic, format version, model kind, then per
// network a layer count and per layer dims + row-major f64 weights + biases.
// Optimizer state is not persisted; loaded models start with zeroed momentum.
void saveSslModel(const SslModel& m, const std::string& path);
SslModel loadSslModel(const std::string& path);

void saveClassifier(const Mlp& net, const std::string& path);
Mlp loadClassifier(const std::string& path);

void saveSupervisedModel(const SupervisedModel& m, const std::string& path);
SupervisedModel loadSupervisedModel(const std::string& path);

// CSVs: per-epoch means as (epoch, mean_loss); per-sample losses as
// (epoch, sample_index, loss).
void saveLossTraceCsv(const LossTrace& trace, const std::string& meanPath,
                      const std::string& perSamplePath);
Mat loadPerSampleTraceCsv(const std::string& path);

}  // namespace clt
