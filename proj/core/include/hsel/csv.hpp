#pragma once

#include <string>
#include <vector>

#include "hsel/dataset.hpp"

namespace hsel {

/// Column bindings for CSV ingestion. Intercepts are prepended to both
/// designs unless disabled.
struct CsvBindings {
  std::string outcome;
  std::string select;
  std::vector<std::string> x_cols;
  std::vector<std::string> w_cols;
  bool intercept = true;
};

/// Reads a CSV with a header row. Missing outcomes are empty cells or the
/// literal NA (case-insensitive); an observed outcome on an unselected row is
/// a hard error. Parse failures report row and column.
Dataset load_csv(const std::string& path, const CsvBindings& bindings);

/// Writes a dataset produced by generate() as c,y,w1,w2 (x = intercept + w1,
/// w = intercept + w1 + w2), 17 significant digits.
void write_simulated_csv(const std::string& path, const Dataset& data);

}  // namespace hsel
