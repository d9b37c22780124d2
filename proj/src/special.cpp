#include "twodelay/special.hpp"

#include <array>
#include <cmath>

namespace twodelay {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
};

}  // namespace

double lanczos_gamma(double x) {
    if (x < 0.5) {
        return kPi / (std::sin(kPi * x) * lanczos_gamma(1.0 - x));
    }
    x -= 1.0;
    double a = kLanczosCoeffs[0];
    const double t = x + kLanczosG + 0.5;
    for (std::size_t i = 1; i < kLanczosCoeffs.size(); ++i) a += kLanczosCoeffs[i] / (x + static_cast<double>(i));
    return std::sqrt(2.0 * kPi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

}  // namespace twodelay
