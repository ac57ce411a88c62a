#pragma once

#include <string>

#include "hsel/dataset.hpp"
#include "hsel/em.hpp"

namespace hsel {

/// Serializes a fit as the versioned machine-readable document (numbers at 17
/// significant digits; SE of nu is an explicit null).
std::string fit_document_json(const FitResult& result, const Dataset& data,
                              const FitOptions& options, const std::string& method = "em");

void write_fit_document(const std::string& path, const FitResult& result, const Dataset& data,
                        const FitOptions& options, const std::string& method = "em");

/// Reads parameters back from a fit document (or any object with an
/// "estimates" member of the same shape); used for file-based initialization.
SlParams params_from_json_text(const std::string& text);
SlParams params_from_json_file(const std::string& path);

}  // namespace hsel
