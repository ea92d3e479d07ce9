#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "diffged/denoiser.hpp"
#include "diffged/diffusion.hpp"
#include "diffged/graph.hpp"
#include "diffged/optimizer.hpp"

namespace diffged {

/// Parameters of a linear noise schedule.
struct ScheduleSpec {
  int steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  NoiseSchedule build() const { return build_schedule(steps, beta_start, beta_end); }
  bool operator==(const ScheduleSpec&) const = default;
};

/// Everything needed to solve with, or resume training of, a model.
struct Checkpoint {
  DenoiserParams<double> params;
  LabelVocabulary vocab;
  ScheduleSpec schedule;
  std::optional<OptimizerState> optimizer;

  bool operator==(const Checkpoint&) const = default;
};

/// Binary container: the bytes "DGED", a little-endian uint32 format version,
/// a uint64 header length, a JSON header (config, vocabulary, schedule,
/// block names and shapes, optimizer counters) and then the raw doubles of
/// every block in header order, followed by the optimizer moments if present.
/// Loading returns a Checkpoint equal to the saved one.
void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void write_checkpoint(const Checkpoint& checkpoint, std::ostream& out);
Checkpoint read_checkpoint(std::istream& in);

}  // namespace diffged
