#include "hsel/dataset.hpp"

#include <Eigen/QR>
#include <cmath>
#include <string>

namespace hsel {

namespace {

void require_full_rank(const Eigen::MatrixXd& m, const char* name) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(1e-10);
  if (qr.rank() < m.cols())
    throw domain_error(std::string(name) + " design matrix is column rank deficient");
}

}  // namespace

Dataset::Dataset(std::vector<uint8_t> c, std::vector<std::optional<double>> v1, Eigen::MatrixXd x,
                 Eigen::MatrixXd w)
    : c_(std::move(c)), v1_(std::move(v1)), x_(std::move(x)), w_(std::move(w)) {
  const long n = static_cast<long>(c_.size());
  if (n == 0) throw domain_error("dataset is empty");
  if (static_cast<long>(v1_.size()) != n || x_.rows() != n || w_.rows() != n)
    throw domain_error("dataset components disagree on the number of rows");
  if (x_.cols() == 0 || w_.cols() == 0) throw domain_error("empty design matrix");
  if (n < x_.cols() + w_.cols() + 2)
    throw domain_error("dataset needs at least p+q+2 rows");
  for (long i = 0; i < n; ++i) {
    if (c_[i] != 0 && c_[i] != 1)
      throw domain_error("selection indicator must be 0/1 at row " + std::to_string(i));
    if (c_[i] == 1) {
      if (!v1_[i].has_value() || !std::isfinite(*v1_[i]))
        throw domain_error("selected row " + std::to_string(i) + " lacks a finite outcome");
      ++n_selected_;
    } else if (v1_[i].has_value()) {
      throw domain_error("unselected row " + std::to_string(i) + " carries an outcome value");
    }
  }
  if (!x_.allFinite() || !w_.allFinite())
    throw domain_error("design matrices contain non-finite entries");
  require_full_rank(x_, "outcome");
  require_full_rank(w_, "selection");
}

}  // namespace hsel
