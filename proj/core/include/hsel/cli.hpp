#pragma once

#include <string>
#include <vector>

#include "hsel/csv.hpp"
#include "hsel/em.hpp"
#include "hsel/simgen.hpp"

namespace hsel {

/// Parsed command invocation; the executable translates flags into this and
/// dispatches through run().
struct RunConfig {
  enum class Command { fit, simulate, mcstudy, residuals };
  Command command = Command::fit;

  std::string input;    // CSV path (fit, residuals)
  std::string output;   // output path or prefix
  CsvBindings bindings;
  FitOptions fit_options;
  std::string method = "em";  // "em" or "two-step"
  std::string init_file;      // when set, initialization comes from this JSON

  DgpConfig dgp;          // simulate
  std::string study_file; // mcstudy
  int replicates = 100;
  int study_threads = 1;

  int envelope_nsim = 100;
  double coverage = 0.95;
  bool refit_envelope = false;
  uint64_t seed = 1;
};

/// A study description parsed from a key = value file.
struct StudyConfig {
  DgpConfig dgp;
  std::vector<FitOptions> fits;
  int replicates = 100;
  int threads = 1;
};

StudyConfig parse_study_config(const std::string& path);

/// Executes one command; returns the process exit status (0 unless a hard
/// error occurred; warnings and non-convergence stay status 0).
int run(const RunConfig& config);

}  // namespace hsel
