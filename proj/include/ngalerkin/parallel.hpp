#pragma once

namespace ngalerkin {

/// Selects the OpenMP kernel or the serial reference kernel. Both produce
/// identical results up to floating-point reassociation in reductions that
/// the serial reference performs in a different (but fixed) order.
enum class Exec { serial, parallel };

}  // namespace ngalerkin
