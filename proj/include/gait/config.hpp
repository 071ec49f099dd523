#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gait/dataio.hpp"
#include "gait/training.hpp"

namespace gait {

/// Every knob of a run. Text form: `key = value` lines under [data], [model],
/// [train], [eval] and [run] sections; `#` starts a comment.
struct RunConfig {
    DatasetSpec data;
    std::filesystem::path data_root = "data";

    TrainConfig train;
    std::size_t steps = 2000;
    std::size_t checkpoint_every = 100;
    std::vector<std::string> train_sequences{"nm-01", "bg-01", "cl-01"};

    std::vector<std::string> gallery{"nm-01"};
    std::vector<std::string> probe{"nm-02", "bg-02", "cl-02"};

    std::uint64_t seed = 1;
    int workers = 1;
    std::filesystem::path out = "run";

    /// Throws std::invalid_argument naming the first problem.
    void validate() const;
};

/// Sets one `section.key` from its text value. Unknown keys throw.
void apply_setting(RunConfig& cfg, const std::string& dotted_key, const std::string& value);

RunConfig parse_config(std::istream& is, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);
/// Text form that parses back to an equal configuration.
std::string dump_config(const RunConfig& cfg);

}  // namespace gait
