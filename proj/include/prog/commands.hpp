#pragma once

#include <string>
#include <vector>

namespace prog::commands {

// Every command returns a process exit code:
//   0 success, 1 numeric/training failure, 2 configuration/input failure.
// overrides are "dotted.key=value" pairs applied on top of the config file.

int cmd_prepare(const std::string& config_path, const std::vector<std::string>& overrides);
int cmd_synth(const std::string& config_path, const std::vector<std::string>& overrides);
int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides);
int cmd_evaluate(const std::string& config_path, const std::vector<std::string>& overrides,
                 const std::string& checkpoint_dir);
int cmd_predict(const std::string& config_path, const std::vector<std::string>& overrides,
                const std::string& checkpoint_dir, const std::string& windows_path,
                const std::string& output_path);
int cmd_gradcheck(const std::string& config_path, const std::vector<std::string>& overrides);

}  // namespace prog::commands
