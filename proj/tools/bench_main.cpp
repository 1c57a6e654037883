#include "ngopt/fock.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

using namespace ngopt;

namespace {

double time_med(const std::function<void()>& fn, int reps = 5) {
    std::vector<double> ts;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        ts.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(ts.begin(), ts.end());
    return ts[reps / 2];
}

} // namespace

int main() {
    std::printf("%-44s %10s %10s %8s\n", "kernel", "serial", "parallel", "speedup");

    {
        auto g = random_generator(2, 2, 1.0, 0.5, 17);
        std::vector<int> cuts{23, 23, 11, 11};
        const double ts = time_med([&] { gaussian_fock_amplitudes_serial(g, cuts); });
        const double tp = time_med([&] { gaussian_fock_amplitudes(g, cuts, true); });
        std::printf("%-44s %9.3fs %9.3fs %7.2fx\n", "hermite recurrence fill (24^2 x 12^2 box)",
                    ts, tp, ts / tp);
    }
    {
        auto v = particle_form(1.2, cplx(0.3, 0.2), 40, 60);
        Vec xs = Vec::LinSpaced(161, -9.0, 9.0);
        const double ts = time_med([&] { wigner_grid_serial(v, xs, xs); });
        const double tp = time_med([&] { wigner_grid(v, xs, xs, true); });
        std::printf("%-44s %9.3fs %9.3fs %7.2fx\n", "wigner grid (161^2, cutoff 60)", ts, tp,
                    ts / tp);
    }
    return 0;
}
