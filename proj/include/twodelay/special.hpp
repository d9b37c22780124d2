#pragma once

namespace twodelay {

/// Gamma function by the Lanczos approximation (g = 7, 9 terms), reflection for x < 0.5.
/// Relative error below 1e-13 away from the poles.
double lanczos_gamma(double x);

}  // namespace twodelay
