#include "oracles/clausing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace clausing_oracle {

namespace {

constexpr double kPi = std::numbers::pi;

// Dense Gaussian elimination with partial pivoting for (I - K) nu = f.
std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                std::vector<double> b) {
  int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (int r = col + 1; r < n; ++r) {
      double m = a[r][col] / a[col][col];
      if (m == 0.0) continue;
      for (int c = col; c < n; ++c) a[r][c] -= m * a[col][c];
      b[r] -= m * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

}  // namespace

double wall_survival(double x, int n_polar, int n_azimuth) {
  if (x <= 0.0) return 0.5;
  // Emission point on the wall at (1, 0) in the cross-section, inward
  // normal (-1, 0). Local frame: z along the normal, (x, y) in the
  // (circumferential, axial) tangent plane. Cosine emission: density
  // cos(t)/pi over the solid angle of the hemisphere.
  double sum = 0.0;
  double dt = (kPi / 2.0) / n_polar;
  double dp = (2.0 * kPi) / n_azimuth;
  for (int it = 0; it < n_polar; ++it) {
    double t = (it + 0.5) * dt;
    double st = std::sin(t), ct = std::cos(t);
    double w = ct * st / kPi;  // cosine density x sin(t) Jacobian
    for (int ip = 0; ip < n_azimuth; ++ip) {
      double p = (ip + 0.5) * dp;
      double dx = -ct;                 // radial (toward the axis)
      double dy = st * std::cos(p);    // circumferential
      double dz = st * std::sin(p);    // axial
      if (dz <= 0.0) continue;         // one-sided: toward the far end only
      // Chord in the cross-section from (1,0) along (dx,dy):
      // (1 + u dx)^2 + (u dy)^2 = 1  =>  u = -2 dx / (dx^2 + dy^2)
      double perp2 = dx * dx + dy * dy;
      double u = -2.0 * dx / perp2;
      double axial = dz * u;  // axial advance at the next wall strike
      if (axial > x) sum += w;
    }
  }
  return sum * dt * dp;
}

double entrance_survival(double x, int n_radius, int n_polar, int n_azimuth) {
  // Average over the entrance disk (area-uniform radius sampling) and over
  // cosine-law flux directions (polar density 2 sin t cos t).
  double dt = (kPi / 2.0) / n_polar;
  double dp = (2.0 * kPi) / n_azimuth;
  double total = 0.0;
  for (int ir = 0; ir < n_radius; ++ir) {
    double r = std::sqrt((ir + 0.5) / n_radius);
    for (int it = 0; it < n_polar; ++it) {
      double t = (it + 0.5) * dt;
      double st = std::sin(t), ct = std::cos(t);
      double w = 2.0 * st * ct / (2.0 * kPi) * dt * dp;
      if (st < 1e-12) {
        total += n_azimuth * w;  // axial ray: never touches the wall
        continue;
      }
      for (int ip = 0; ip < n_azimuth; ++ip) {
        double p = (ip + 0.5) * dp;
        // Distance to the wall in the cross-section from (r, 0) along
        // (cos p, sin p): t_perp = -r cos p + sqrt(1 - r^2 sin^2 p).
        double rs = r * std::sin(p);
        double tperp = -r * std::cos(p) + std::sqrt(1.0 - rs * rs);
        double axial = tperp * ct / st;  // depth at the wall strike
        if (axial > x) total += w;
      }
    }
  }
  return total / n_radius;
}

double transmission(double l_over_d, int cells, int quad) {
  double lr = 2.0 * l_over_d;  // length in radii
  int n = cells;
  double h = lr / n;

  // Survival functions: entrance on the cell grid, wall re-emission on the
  // half-cell grid (sources sit at cell centers, targets at cell edges).
  std::vector<double> ge(n + 1), gw_half(n);
  for (int i = 0; i <= n; ++i) ge[i] = entrance_survival(i * h, quad, quad, quad);
  for (int k = 0; k < n; ++k) gw_half[k] = wall_survival((k + 0.5) * h, 2 * quad, 2 * quad);
  // Survival past a nonpositive distance is the full one-sided half.
  auto gw_at = [&](int k) { return k < 0 ? 0.5 : gw_half[k]; };

  // First-strike source per cell: molecules from the entrance hitting the
  // wall inside cell i.
  std::vector<double> fe(n);
  for (int i = 0; i < n; ++i) fe[i] = ge[i] - ge[i + 1];

  // Wall-to-wall kernel: fraction of re-emissions from the center of cell j
  // that next strike the wall inside cell i, summed over both directions.
  // For i != j the band is [( |i-j| - 1/2 ) h, ( |i-j| + 1/2 ) h] on one
  // side; for i == j it is the half-cell on each side.
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double k;
      if (i == j) {
        k = 2.0 * (0.5 - gw_at(0));
      } else {
        int d = std::abs(i - j);
        k = gw_at(d - 1) - gw_at(d);
      }
      m[i][j] = (i == j ? 1.0 : 0.0) - k;
    }
  }

  std::vector<double> nu = solve_dense(std::move(m), fe);

  // Transmission: direct flight-through plus wall re-emissions surviving to
  // the far end. Cell j's center is (n - j - 1/2) h from the exit.
  double tr = ge[n];
  for (int j = 0; j < n; ++j) tr += nu[j] * gw_at(n - j - 1);
  return tr;
}

}  // namespace clausing_oracle
