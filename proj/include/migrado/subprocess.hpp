#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "migrado/common.hpp"

namespace migrado {

struct ProcessResult {
  bool timed_out = false;
  bool exited = false;  // false when killed by a signal
  int exit_code = -1;
  int signal = 0;
  Bytes stdout_bytes;
  std::string stderr_text;  // truncated to the first 64 KiB
};

/// Runs argv[0] (searched on PATH) with `input` on stdin and collects
/// stdout and stderr. The child is killed once `timeout` elapses. Throws
/// Error(converter_crashed) if the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, ByteView input, std::chrono::milliseconds timeout);

}  // namespace migrado
