#pragma once

#include "mvsde/measure.hpp"
#include "mvsde/model.hpp"
#include "mvsde/paths.hpp"

#include <span>

namespace mvsde::detail {

/// In-place scheme step shared by the simulators.  b and sig are caller
/// scratch of sizes d and d*m; particle and step_index only label the
/// divergence diagnostic.
void step_inplace(const Model& model, Scheme scheme, double t, std::span<double> x,
                  const EmpiricalMeasure& mu, double dt, std::span<const double> dW,
                  std::span<double> b, std::span<double> sig, long particle, long step_index);

} // namespace mvsde::detail
