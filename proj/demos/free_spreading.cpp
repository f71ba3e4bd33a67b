// Damped linear evolution: the mass decays at the exact exponential rate.
#include <cstdio>
#include "dnls/dnls.hpp"

int main() {
    auto grid = dnls::Grid::make(32.0, 256, 1);
    auto u0 = dnls::gaussian_data(grid, 1.0, 1.0, 0.0);
    dnls::ProblemSpec spec{.dimension = 1, .alpha = 2.0, .mu = 1, .damping = 0.5};
    dnls::SolverConfig cfg;
    cfg.t_final = 2.0;
    cfg.linear_only = true;
    cfg.sample_stride = 200;
    auto outcome = dnls::run(u0, spec, cfg);
    const double m0 = outcome.series.front().mass;
    std::printf("   t      mass        e^{-2at} m0\n");
    for (const auto& s : outcome.series)
        std::printf("%5.2f  %.6e  %.6e\n", s.t, s.mass, std::exp(-2.0 * spec.damping * s.t) * m0);
    return 0;
}
