#pragma once

#include <filesystem>
#include <iosfwd>

#include "gait/config.hpp"

namespace gait {

/// Each command validates `cfg` before touching the filesystem and returns the
/// process exit status. Errors are reported on `err`.
int cmd_gen_data(const RunConfig& cfg, bool force, std::ostream& out, std::ostream& err);

/// Trains for cfg.steps steps, checkpointing to <out>/checkpoint every
/// cfg.checkpoint_every steps and at the end; metrics go to <out>/metrics.csv.
/// With `resume` the run continues from <out>/checkpoint.
int cmd_train(const RunConfig& cfg, bool resume, std::ostream& out, std::ostream& err);

/// Embeds the split with the checkpoint in `checkpoint` (default
/// <out>/checkpoint) and writes report.txt, report.csv and embeddings/ to <out>.
int cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint, std::ostream& out, std::ostream& err);

int cmd_gradcheck(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace gait
