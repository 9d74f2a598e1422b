#pragma once

#include <map>
#include <string>
#include <vector>

namespace privapi {

struct ProcessOptions {
  std::vector<std::string> argv;                // argv[0] is looked up on PATH
  std::string stdin_data;
  double wall_timeout_secs = 0.0;               // <= 0: no limit
  long cpu_limit_secs = 0;                      // RLIMIT_CPU, 0: unlimited
  long memory_limit_mb = 0;                     // RLIMIT_AS, 0: unlimited
  std::map<std::string, std::string> env;       // overrides on top of the inherited environment
};

struct ProcessResult {
  int exit_code = -1;     // valid when term_signal == 0
  int term_signal = 0;
  bool timed_out = false;  // killed by the wall-clock watchdog
  double duration_secs = 0.0;
  std::string out;
  std::string err;
};

/// Runs a child in its own process group, feeding stdin and collecting
/// stdout/stderr. On timeout the whole group is killed. Throws
/// RunnerUnavailable if the program cannot be started.
ProcessResult run_process(const ProcessOptions& options);

}  // namespace privapi
