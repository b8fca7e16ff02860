#ifndef PAREVO_FITNESS_HPP
#define PAREVO_FITNESS_HPP

#include "types.hpp"

namespace parevo {

// Inverse-runtime fitness: 0 for any build/test failure, timeout, detected
// race or suspected deadlock; 1/(T + epsilon) for a clean pass with median
// runtime T. Bit-reproducible given (T, epsilon).
//
// Throws PreconditionError for malformed reports: gating violations, infra
// reports, or a full pass with no recorded runtime.
double compute_fitness(const EvaluationReport& report, double epsilon_s);

}  // namespace parevo

#endif
