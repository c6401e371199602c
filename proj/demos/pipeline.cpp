// SPDX-License-Identifier: MIT
// Weight x_1 on the half plane: rearrange a two-bump function, solve the
// critical Moser problem (q = D = 3) and compare with the extremal.
#include <cstdio>

#include "wtm/wtm.hpp"

int main() {
    const wtm::WeightSpec spec = wtm::fixtures::weight_x1();
    const wtm::GeometricConstants c = wtm::geometric_constants(spec);
    std::printf("C_D = %.10f  P_w = %.10f  D = %g\n", c.unit_ball_measure, c.perimeter, c.D);

    const wtm::GridFunction f = wtm::fixtures::make(wtm::fixtures::Kind::two_bumps, spec, 128);
    const wtm::RadialProfile U = wtm::radial_rearrangement(f, spec, c);
    std::printf("support radius %.6f, max %.6f\n", U.support_radius(), U.values()[0]);
    for (double p : {1.0, 2.0, c.D}) {
        const auto ps = wtm::polya_szego_check(f, spec, c, p);
        std::printf("p = %g: |grad f*| = %.6f <= |grad f| = %.6f\n", p, ps.lhs, ps.rhs);
    }

    wtm::MoserProblem problem;
    problem.q = c.D;
    const wtm::MoserReport rep = wtm::optimize(problem);
    std::printf("F* = %.10f (tau-scan %.10f, %zu iterations)\n", rep.value, rep.baseline_value, rep.iterations);

    const wtm::Extremal u = wtm::build_extremal(rep, spec, c);
    std::printf("extremal: |grad u|_D = %.8f, mean exp = %.10f\n", wtm::polar_gradient_norm(u, spec, c.D),
                wtm::polar_exponential_mean(u, spec, c));
}
