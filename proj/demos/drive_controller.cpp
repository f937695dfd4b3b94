// Replays the figure-eight pressure log through the drive controller and
// reports the two turning lobes.

#include <algorithm>
#include <cstdio>

#include "stsexo/stsexo.hpp"

using namespace stsexo;

int main() {
  const auto frames = load_pressure_log(STSEXO_DATA_DIR "/pressure_figure8.csv");
  const ControlGains gains;
  const auto run = run_pressure_log(frames, gains, 1e-3, false);
  const auto& c = run.commands.front();
  std::printf("%zu frames, first command v = %.3f m/s, omega = %.4f rad/s (radius %.3f m)\n", frames.size(), c.v,
              c.omega, c.v / c.omega);
  const std::size_t half = run.path.size() / 2;
  std::printf("first lobe area %.3f m^2, second lobe area %.3f m^2\n", signed_area(run.path, 0, half),
              signed_area(run.path, half, run.path.size()));
  const auto [lo, hi] = std::minmax_element(run.path.begin(), run.path.end(),
                                            [](const PathPoint& a, const PathPoint& b) { return a.y < b.y; });
  const auto& end = run.path.back();
  std::printf("y range [%.3f, %.3f] m, end point (%.3f, %.3f) m\n", lo->y, hi->y, end.x, end.y);
  return 0;
}
