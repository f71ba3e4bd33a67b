// Focusing mass-critical collapse and its arrest by damping, side by side.
#include <cstdio>
#include "dnls/dnls.hpp"

int main() {
    auto grid = dnls::Grid::make(32.0, 512, 1);
    auto u0 = dnls::gaussian_data(grid, 3.0, 1.0, 0.0);
    dnls::SolverConfig cfg;
    cfg.dt_init = 1e-3;
    cfg.dt_min = 1e-8;
    cfg.t_final = 2.0;
    cfg.adapt = true;
    cfg.blowup_grad_factor = 4.0;
    for (double a : {0.0, 2.0, 5.0}) {
        dnls::ProblemSpec spec{.dimension = 1, .alpha = 4.0, .mu = -1, .damping = a};
        auto outcome = dnls::run(u0, spec, cfg);
        std::printf("a = %4.1f  ->  %s at t = %.4f\n", a, dnls::to_string(outcome.kind),
                    outcome.t_end);
    }
    return 0;
}
