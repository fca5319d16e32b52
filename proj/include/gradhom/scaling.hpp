#pragma once

// Dimensional analysis: tensor maxima, intrinsic lengths and the HS1/HS2 regimes.

#include "gradhom/microstructure.hpp"

#include <cmath>
#include <string>

namespace gradhom {

enum class Regime { HS1, HS2, Other };

std::string to_string(Regime r);
/// Accepts "hs1", "hs2", "other" (case-insensitive).
Regime parse_regime(const std::string &s);

struct TensorMaxima {
    double calK = 0.0;
    double calS = 0.0;
    double calA = 0.0;
};

struct IntrinsicLengths {
    double ell_SG = 0.0;
    double ell_chiral = 0.0;
};

struct ScalingReport {
    double calK = 0.0, calS = 0.0, calA = 0.0;
    double ell_SG = 0.0, ell_chiral = 0.0;
    double p_prime = 2.0, q_prime = 2.0;
    double epsilon = 0.0;
    Regime regime = Regime::Other;
};

/// Exponents of epsilon multiplying S in sigma, A in mu, and S in mu.
struct RegimeMultipliers {
    double s_in_sigma = 0.0;
    double a_in_mu = 0.0;
    double s_in_mu = 0.0;
};

/// Factor-of-3 band on logarithms.
inline const double kDefaultRegimeTol = std::log(3.0);

TensorMaxima tensor_maxima(const CoefficientField &field);

/// ell_SG = sqrt(calA / calK), ell_chiral = (calS / (calK ell_SG^{1/p'}))^{q'}.
IntrinsicLengths intrinsic_lengths(double calK, double calS, double calA, double p_prime,
                                   double q_prime);

Regime classify_regime(double ell_SG, double ell_chiral, double epsilon, double q_prime,
                       double tol = kDefaultRegimeTol);

RegimeMultipliers regime_multipliers(Regime regime);

ScalingReport scale_report(const CoefficientField &field, double epsilon, double p_prime = 2.0,
                           double q_prime = 2.0, double tol = kDefaultRegimeTol);

} // namespace gradhom
