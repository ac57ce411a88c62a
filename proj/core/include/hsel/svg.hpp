#pragma once

#include <string>

#include "hsel/diagnostics.hpp"

namespace hsel {

/// Normal QQ plot of the martingale-type residuals with envelope bands,
/// written as a standalone SVG.
void write_qq_envelope_svg(const std::string& path, const Envelope& env);

}  // namespace hsel
