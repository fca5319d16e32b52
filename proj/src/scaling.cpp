#include "gradhom/scaling.hpp"

#include "gradhom/errors.hpp"

#include <algorithm>
#include <cctype>

namespace gradhom {

std::string to_string(Regime r) {
    switch (r) {
    case Regime::HS1:
        return "HS1";
    case Regime::HS2:
        return "HS2";
    case Regime::Other:
        break;
    }
    return "other";
}

Regime parse_regime(const std::string &s) {
    std::string t = s;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "hs1")
        return Regime::HS1;
    if (t == "hs2")
        return Regime::HS2;
    if (t == "other")
        return Regime::Other;
    throw ConfigError("unknown regime '" + s + "' (expected hs1 or hs2)");
}

namespace {

double max_block_norm(std::span<const double> all, size_t stride) {
    double best = 0.0;
    for (size_t off = 0; off < all.size(); off += stride) {
        double s = 0.0;
        for (size_t e = 0; e < stride; ++e)
            s += all[off + e] * all[off + e];
        best = std::max(best, s);
    }
    return std::sqrt(best);
}

void check_hoelder(double p_prime, double q_prime) {
    if (!(p_prime >= 1.0) || !(q_prime >= 1.0) || !std::isfinite(p_prime) || !std::isfinite(q_prime))
        throw ConfigError("p' and q' must lie in [1, inf)");
    if (std::abs(1.0 / p_prime + 1.0 / q_prime - 1.0) > 1e-12)
        throw ConfigError("p' and q' must satisfy 1/p' + 1/q' = 1");
}

} // namespace

TensorMaxima tensor_maxima(const CoefficientField &field) {
    const int d = field.dim();
    if (field.grid().num_nodes() == 0)
        throw GeometryError("tensor_maxima on an empty field");
    return {max_block_norm(field.K_all(), static_cast<size_t>(ipow(d, 4))),
            max_block_norm(field.S_all(), static_cast<size_t>(ipow(d, 5))),
            max_block_norm(field.A_all(), static_cast<size_t>(ipow(d, 6)))};
}

IntrinsicLengths intrinsic_lengths(double calK, double calS, double calA, double p_prime,
                                   double q_prime) {
    if (!(calK > 0.0))
        throw InvalidMaterial("calK must be positive");
    if (calS < 0.0 || calA < 0.0)
        throw InvalidMaterial("tensor maxima must be non-negative");
    check_hoelder(p_prime, q_prime);
    if (calA == 0.0) {
        if (calS > 0.0)
            throw ConsistencyError("chiral stiffness without second-gradient stiffness (calA = 0, calS > 0)");
        return {0.0, 0.0};
    }
    IntrinsicLengths out;
    out.ell_SG = std::sqrt(calA / calK);
    out.ell_chiral = std::pow(calS / (calK * std::pow(out.ell_SG, 1.0 / p_prime)), q_prime);
    return out;
}

Regime classify_regime(double ell_SG, double ell_chiral, double epsilon, double q_prime, double tol) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ConfigError("epsilon must lie in (0, 1)");
    if (!(tol > 0.0))
        throw ConfigError("regime tolerance must be positive");
    if (!(ell_SG > 0.0))
        return Regime::Other;
    auto near = [tol](double value, double target) {
        return value > 0.0 && std::abs(std::log(value / target)) <= tol;
    };
    // achiral materials carry no chiral constraint
    auto chiral_ok = [&](double target) { return ell_chiral == 0.0 || near(ell_chiral, target); };

    if (near(ell_SG, epsilon) && chiral_ok(std::pow(epsilon, q_prime + 1.0)))
        return Regime::HS1;
    if (near(ell_SG, 1.0) && chiral_ok(std::pow(epsilon, q_prime)))
        return Regime::HS2;
    return Regime::Other;
}

RegimeMultipliers regime_multipliers(Regime regime) {
    switch (regime) {
    case Regime::HS1:
        return {2.0, 2.0, 2.0};
    case Regime::HS2:
        return {1.0, 0.0, 1.0};
    case Regime::Other:
        break;
    }
    throw UnsupportedRegime("only HS1 and HS2 scalings can be homogenized");
}

ScalingReport scale_report(const CoefficientField &field, double epsilon, double p_prime,
                           double q_prime, double tol) {
    const auto m = tensor_maxima(field);
    const auto len = intrinsic_lengths(m.calK, m.calS, m.calA, p_prime, q_prime);
    ScalingReport r;
    r.calK = m.calK;
    r.calS = m.calS;
    r.calA = m.calA;
    r.ell_SG = len.ell_SG;
    r.ell_chiral = len.ell_chiral;
    r.p_prime = p_prime;
    r.q_prime = q_prime;
    r.epsilon = epsilon;
    r.regime = classify_regime(len.ell_SG, len.ell_chiral, epsilon, q_prime, tol);
    return r;
}

} // namespace gradhom
