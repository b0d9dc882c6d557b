#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Shared tolerances and step sizes for the numerical kernels.
struct NumericsConfig {
    double fd_step = 1e-5;        ///< central-difference base step, scaled by (1 + |base|)
    double newton_tol = 1e-12;    ///< relative residual target for Newton solves
    int newton_max_iter = 64;
    double ode_step = 1e-3;       ///< fixed step for geodesic / flow integration
    int quad_samples = 100000;    ///< low-discrepancy points for indicatrix volumes
    double cone_margin = 1e-3;    ///< relative distance kept from cone boundaries

    void validate() const {
        if (!(fd_step > 0) || !(newton_tol > 0) || !(ode_step > 0))
            throw std::invalid_argument("NumericsConfig: steps and tolerances must be positive");
        if (newton_max_iter < 1)
            throw std::invalid_argument("NumericsConfig: newton_max_iter must be >= 1");
        if (quad_samples < 1000)
            throw std::invalid_argument("NumericsConfig: quad_samples must be >= 1000");
        if (!(cone_margin > 0.0 && cone_margin < 0.5))
            throw std::invalid_argument("NumericsConfig: cone_margin must lie in (0, 0.5)");
    }
};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteEvaluation : Error { using Error::Error; };
struct DomainViolation : Error { using Error::Error; };
struct DegenerateTensor : Error { using Error::Error; };
struct NavigationRegimeViolation : Error { using Error::Error; };
struct PreConeViolation : Error { using Error::Error; };
struct ConeViolation : Error { using Error::Error; };
struct NewtonDivergence : Error { using Error::Error; };
struct KindViolation : Error { using Error::Error; };
struct LegendreOutOfRange : Error { using Error::Error; };
struct HypothesisViolation : Error { using Error::Error; };
struct FlowEscape : Error { using Error::Error; };

/// Geodesic left the admissible set mid-integration; carries the exit time.
struct DomainExit : Error {
    double exit_time;
    explicit DomainExit(double t, const std::string& what)
        : Error(what), exit_time(t) {}
};

/// Scalar root search exhausted its bracket; carries the scanned interval.
struct RootNotBracketed : Error {
    double lo, hi;
    RootNotBracketed(double lo_, double hi_, const std::string& what)
        : Error(what), lo(lo_), hi(hi_) {}
};

}  // namespace finsler
