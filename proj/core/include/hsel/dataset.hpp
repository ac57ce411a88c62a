#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "hsel/errors.hpp"

namespace hsel {

/// Selection data: outcome v1 is observed exactly where the selection
/// indicator c is 1; absent outcomes are represented by an empty optional,
/// never by a numeric stand-in.
class Dataset {
 public:
  Dataset(std::vector<uint8_t> c, std::vector<std::optional<double>> v1, Eigen::MatrixXd x,
          Eigen::MatrixXd w);

  long n() const { return static_cast<long>(c_.size()); }
  int p() const { return static_cast<int>(x_.cols()); }
  int q() const { return static_cast<int>(w_.cols()); }

  bool selected(long i) const { return c_[i] != 0; }
  /// Observed outcome; only valid on selected rows.
  double outcome(long i) const { return *v1_[i]; }
  const std::vector<uint8_t>& c() const { return c_; }
  const std::vector<std::optional<double>>& v1() const { return v1_; }
  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::MatrixXd& w() const { return w_; }
  long n_selected() const { return n_selected_; }

 private:
  std::vector<uint8_t> c_;
  std::vector<std::optional<double>> v1_;
  Eigen::MatrixXd x_, w_;
  long n_selected_ = 0;
};

}  // namespace hsel
