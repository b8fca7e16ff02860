#include "fitness.hpp"

#include "common.hpp"

namespace parevo {

double compute_fitness(const EvaluationReport& report, double epsilon_s) {
    if (epsilon_s <= 0) throw PreconditionError("fitness: epsilon must be > 0");
    if (report.infra_error) throw PreconditionError("fitness: infrastructure failure is not a candidate verdict");
    report.check_gating();

    if (report.build.status != BuildStatus::ok) return 0.0;
    if (report.tests.status != TestStatus::passed) return 0.0;
    if (report.race.status == RaceStatus::race_detected || report.race.status == RaceStatus::deadlock_suspected)
        return 0.0;
    if (report.race.status == RaceStatus::skipped || !report.runtime_s)
        throw PreconditionError("fitness: passing report lacks a profiled runtime");
    return 1.0 / (*report.runtime_s + epsilon_s);
}

}  // namespace parevo
