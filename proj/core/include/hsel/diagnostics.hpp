#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "hsel/dataset.hpp"
#include "hsel/em.hpp"
#include "hsel/model.hpp"

namespace hsel {

/// Martingale residuals r_m = C + ln S and their signed square-root transform
/// r_mt. Rows whose survival term vanished numerically are listed in flagged
/// (their residuals are +-inf markers).
struct ResidualSet {
  Eigen::VectorXd r_m;
  Eigen::VectorXd r_mt;
  std::vector<uint8_t> c;
  std::vector<long> flagged;
};

ResidualSet martingale_residuals(const SlParams& params, const Dataset& data);

/// Per-rank envelope bands from data simulated under the fitted model.
struct Envelope {
  Eigen::VectorXd theoretical;      // standard-normal plotting positions
  Eigen::VectorXd low, median, high;
  Eigen::VectorXd observed_sorted;  // observed r_mt, ascending
  double coverage = 0.95;
  int n_sim = 100;
};

struct EnvelopeOptions {
  int n_sim = 100;
  double coverage = 0.95;
  uint64_t seed = 1;
  bool refit = false;        // refit each replicate instead of plugging in theta-hat
  int threads = 1;
  FitOptions fit_options;    // used only when refit is true
};

Envelope simulated_envelope(const SlParams& params, const Dataset& data,
                            const EnvelopeOptions& options);

}  // namespace hsel
