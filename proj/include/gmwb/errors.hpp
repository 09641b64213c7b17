#pragma once

#include <stdexcept>
#include <string>

namespace gmwb {

// Argument outside a function's admissible domain (or non-finite input).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Evaluation requested within tolerance of a pole of Gamma or Kummer M.
struct PoleError : std::domain_error {
    using std::domain_error::domain_error;
};

// A series, continued fraction or adaptive quadrature failed to reach its
// accuracy target within the configured work limit.
struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No admissible truncation point satisfies the analytic tail bound of a
// semi-infinite spectral integral.
struct TailBoundFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Start/target pair matches none of the supported hitting-time cases.
struct CaseError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Two simple poles of a Laplace transform coincide within tolerance, so the
// residue decomposition would evaluate a near-0/0. Callers may perturb the
// offending parameter by 1e-7 and retry.
struct PoleDegeneracy : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Root bracket does not enclose a sign change.
struct NoBracket : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gmwb
