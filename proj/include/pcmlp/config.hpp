#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcmlp/envs.hpp"
#include "pcmlp/odpc.hpp"
#include "pcmlp/pcmlp.hpp"

namespace pcmlp {

struct RunConfig {
  // single | bonus-decay | ablation | coverage | optimism | odpc
  std::string experiment = "single";
  std::string env = "linear-system";
  std::string algorithm = "pcmlp";  // pcmlp | odpc, for single runs
  std::uint64_t seed = 0;
  std::string out = "out";
  std::vector<double> sweep = {0.0, 0.1, 1.0, 5.0};  // bonus scales for ablation / coverage

  PcmlpConfig pcmlp;
  OdpcConfig odpc;
  LinearSystemParams linear_system;
  SparseHillParams sparse_hill;
  TabularLinmdpParams tabular_linmdp;
  ChainParams chain;
};

struct ConfigKey {
  std::string section;
  std::string key;
  std::string doc;
};

// Every accepted key with its documentation, in file order.
std::vector<ConfigKey> config_keys();

// INI text with [section] headers and key = value lines. Unknown sections or
// keys raise ConfigError naming the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Applies "section.key=value".
void apply_override(RunConfig& cfg, const std::string& assignment);
std::string get_value(const RunConfig& cfg, const std::string& section, const std::string& key);

// Every key with its current value; parse_config(resolved_config(c)) == c.
std::string resolved_config(const RunConfig& cfg);

// Builds the named env; env randomness derives from the run seed.
EnvInstance make_env(const RunConfig& cfg);

}  // namespace pcmlp
