#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tpflow/backend.hpp"
#include "tpflow/config.hpp"

namespace tpf {

std::unique_ptr<SchemeBackend> make_backend(const CaseConfig& cfg);
State initial_state(const CaseConfig& cfg, const SchemeBackend& backend);

struct CliOptions {
  std::string out_dir;  // overrides config when nonempty
  uint64_t seed = 0;    // overrides config when nonzero
  std::string backend;  // overrides config when nonempty
  bool quiet = false;
  bool dump_system = false;  // write residual / Jacobian of the first rung
};

// Exit codes: 0 success, 1 check or solve failure, 2 config error.
int cmd_run(const CaseConfig& cfg, const CliOptions& opts);
int cmd_verify(const CaseConfig& cfg, const CliOptions& opts);
int cmd_sweep(const CaseConfig& cfg, const std::string& parameter,
              const std::vector<double>& values, const CliOptions& opts);
int cmd_mesh_gen(const CaseConfig& cfg, const CliOptions& opts);
int cmd_mesh_stats(const CaseConfig& cfg, const CliOptions& opts);

}  // namespace tpf
