#include "zeitlin/grid.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_legendre.h>

namespace zeitlin {

namespace {

struct GlTableDeleter {
  void operator()(gsl_integration_glfixed_table* t) const { gsl_integration_glfixed_table_free(t); }
};

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

double GridField::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

bool GridField::same_grid(const GridField& other) const {
  return n_lat == other.n_lat && n_lon == other.n_lon && colatitude == other.colatitude;
}

GridField make_grid(int n_lat, int n_lon) {
  if (n_lat < 4 || n_lon < 4)
    throw ResolutionError("grid must be at least 4x4, got " + std::to_string(n_lat) + "x" + std::to_string(n_lon));
  GridField g;
  g.n_lat = n_lat;
  g.n_lon = n_lon;
  std::unique_ptr<gsl_integration_glfixed_table, GlTableDeleter> table(
      gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n_lat)));
  if (!table) throw NumericError("Gauss-Legendre table allocation failed");
  std::vector<std::pair<double, double>> nodes(n_lat);
  for (int i = 0; i < n_lat; ++i) {
    double x = 0.0, w = 0.0;
    gsl_integration_glfixed_point(-1.0, 1.0, static_cast<std::size_t>(i), &x, &w, table.get());
    nodes[i] = {x, w};
  }
  // Descending cos(theta): north first.
  std::sort(nodes.begin(), nodes.end(), [](auto a, auto b) { return a.first > b.first; });
  const double dphi = 2.0 * std::numbers::pi / n_lon;
  for (const auto& [x, w] : nodes) {
    g.colatitude.push_back(std::acos(x));
    g.weight.push_back(w * dphi);
  }
  for (int j = 0; j < n_lon; ++j) g.longitude.push_back(dphi * j);
  g.values.assign(static_cast<std::size_t>(n_lat) * n_lon, 0.0);
  return g;
}

GridField synthesize_grid(const SphericalCoefficients& c, int n_lat, int n_lon) {
  GridField g = make_grid(n_lat, n_lon);
  const int lmax = c.max_degree();
  const double scale = std::sqrt(std::max(c.norm_squared(), 1e-300));
  if (c.reality_defect() > 1e-12 * scale)
    throw SymmetryError("synthesize_grid: coefficients do not describe a real field");

  std::vector<double> plm(gsl_sf_legendre_array_n(static_cast<std::size_t>(lmax)));
  std::vector<Complex> fm(2 * lmax + 1);
  std::vector<Complex> phase(static_cast<std::size_t>(n_lon) * (lmax + 1));
  for (int j = 0; j < n_lon; ++j)
    for (int m = 0; m <= lmax; ++m)
      phase[static_cast<std::size_t>(j) * (lmax + 1) + m] = std::polar(1.0, m * g.longitude[j]);

  double residue = 0.0;
  for (int i = 0; i < n_lat; ++i) {
    const double x = std::cos(g.colatitude[i]);
    // Orthonormal Y_lm(theta, 0) with the Condon-Shortley phase, m >= 0.
    if (gsl_sf_legendre_array_e(GSL_SF_LEGENDRE_SPHARM, static_cast<std::size_t>(lmax), x, -1.0, plm.data()) !=
        GSL_SUCCESS)
      throw NumericError("associated Legendre evaluation failed");
    for (int m = -lmax; m <= lmax; ++m) {
      const int am = std::abs(m);
      const double sign = (m < 0 && am % 2 == 1) ? -1.0 : 1.0;  // Y_{l,-m} = (-1)^m conj(Y_lm)
      Complex acc{};
      for (int l = am; l <= lmax; ++l)
        acc += c(l, m) * (sign * plm[gsl_sf_legendre_array_index(static_cast<std::size_t>(l), static_cast<std::size_t>(am))]);
      fm[m + lmax] = acc;
    }
    for (int j = 0; j < n_lon; ++j) {
      const Complex* ph = &phase[static_cast<std::size_t>(j) * (lmax + 1)];
      Complex f = fm[lmax];
      for (int m = 1; m <= lmax; ++m) f += fm[lmax + m] * ph[m] + fm[lmax - m] * std::conj(ph[m]);
      g.at(i, j) = f.real();
      residue = std::max(residue, std::abs(f.imag()));
    }
  }
  g.imag_residue = residue;
  return g;
}

double grid_l2(const GridField& f) {
  double acc = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) acc += f.node_weight(k) * f.values[k] * f.values[k];
  return std::sqrt(acc);
}

double grid_l2_distance(const GridField& a, const GridField& b) {
  if (!a.same_grid(b)) throw DimensionError("grid_l2_distance: grids differ");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    const double d = a.values[k] - b.values[k];
    acc += a.node_weight(k) * d * d;
  }
  return std::sqrt(acc);
}

std::vector<ScatterPoint> scatter_data(const GridField& p_grid, const GridField& ws_grid) {
  if (!p_grid.same_grid(ws_grid)) throw DimensionError("scatter_data: grids differ");
  std::vector<ScatterPoint> out;
  out.reserve(p_grid.values.size());
  for (std::size_t k = 0; k < p_grid.values.size(); ++k)
    out.push_back({p_grid.values[k], ws_grid.values[k], p_grid.node_weight(k)});
  return out;
}

StreamlineAverage streamline_average(const GridField& psi, const GridField& omega, int n_bins) {
  if (!psi.same_grid(omega)) throw DimensionError("streamline_average: grids differ");
  if (n_bins < 2) throw InvalidTruncation("streamline_average: need at least 2 bins");
  const std::size_t total = psi.values.size();
  const int nlat = psi.n_lat, nlon = psi.n_lon;

  StreamlineAverage out;
  out.field = omega;

  const auto [lo, hi] = std::minmax_element(psi.values.begin(), psi.values.end());
  if (*hi - *lo <= 1e-14 * std::max(1.0, std::max(std::abs(*lo), std::abs(*hi)))) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
      num += omega.node_weight(k) * omega.values[k];
      den += omega.node_weight(k);
    }
    std::fill(out.field.values.begin(), out.field.values.end(), num / den);
    out.components = 1;
    out.warning = "stream function is constant; returning the global mean";
    return out;
  }

  // Equal-area quantile bins of psi.
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return psi.values[a] < psi.values[b]; });
  double area = 0.0;
  for (std::size_t k = 0; k < total; ++k) area += psi.node_weight(k);
  // Nodes whose psi agrees to round-off lie on one level set and share a bin.
  const double tie = 1e-12 * (*hi - *lo);
  std::vector<int> bin(total);
  double cum = 0.0;
  for (std::size_t a = 0; a < total;) {
    std::size_t b = a + 1;
    double wsum = psi.node_weight(order[a]);
    while (b < total && psi.values[order[b]] - psi.values[order[b - 1]] <= tie) wsum += psi.node_weight(order[b++]);
    const int which = std::min(n_bins - 1, static_cast<int>((cum + 0.5 * wsum) / area * n_bins));
    cum += wsum;
    for (std::size_t k = a; k < b; ++k) bin[order[k]] = which;
    a = b;
  }

  DisjointSets sets(total);
  auto id = [nlon](int i, int j) { return static_cast<std::size_t>(i) * nlon + static_cast<std::size_t>((j + nlon) % nlon); };
  for (int i = 0; i < nlat; ++i) {
    for (int j = 0; j < nlon; ++j) {
      const std::size_t a = id(i, j);
      // Forward half of the 8-neighbourhood; the rest is covered by symmetry.
      const int di[] = {0, 1, 1, 1};
      const int dj[] = {1, -1, 0, 1};
      for (int q = 0; q < 4; ++q) {
        const int ii = i + di[q];
        if (ii >= nlat) continue;
        const std::size_t b = id(ii, j + dj[q]);
        if (bin[a] == bin[b]) sets.unite(a, b);
      }
    }
  }
  // Pole rings collapse to a single node per bin.
  for (int i : {0, nlat - 1}) {
    for (int j = 1; j < nlon; ++j) {
      for (int jj = 0; jj < j; ++jj) {
        if (bin[id(i, j)] == bin[id(i, jj)]) {
          sets.unite(id(i, j), id(i, jj));
          break;
        }
      }
    }
  }

  std::vector<double> num(total, 0.0), den(total, 0.0);
  for (std::size_t k = 0; k < total; ++k) {
    const std::size_t r = sets.find(k);
    num[r] += omega.node_weight(k) * omega.values[k];
    den[r] += omega.node_weight(k);
  }
  int comps = 0;
  for (std::size_t k = 0; k < total; ++k)
    if (sets.find(k) == k) ++comps;
  for (std::size_t k = 0; k < total; ++k) {
    const std::size_t r = sets.find(k);
    out.field.values[k] = num[r] / den[r];
  }
  out.components = comps;
  return out;
}

int count_blobs(const GridField& f, double threshold, double radius) {
  const int nlat = f.n_lat, nlon = f.n_lon;
  auto wrap = [nlon](int j) { return (j % nlon + nlon) % nlon; };
  GridField s = f;
  for (int i = 0; i < nlat; ++i) {
    for (int j = 0; j < nlon; ++j) {
      double acc = 0.0;
      int cnt = 0;
      for (int di = -1; di <= 1; ++di) {
        const int ii = i + di;
        if (ii < 0 || ii >= nlat) continue;
        for (int dj = -1; dj <= 1; ++dj) {
          acc += f.at(ii, wrap(j + dj));
          ++cnt;
        }
      }
      s.at(i, j) = acc / cnt;
    }
  }

  std::vector<double> x(s.values.size()), y(s.values.size()), z(s.values.size());
  for (int i = 0; i < nlat; ++i)
    for (int j = 0; j < nlon; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * nlon + j;
      x[k] = std::sin(s.colatitude[i]) * std::cos(s.longitude[j]);
      y[k] = std::sin(s.colatitude[i]) * std::sin(s.longitude[j]);
      z[k] = std::cos(s.colatitude[i]);
    }
  const double cos_r = std::cos(radius);
  const double cut = threshold * s.max_abs();
  int count = 0;
  for (int i = 0; i < nlat; ++i) {
    for (int j = 0; j < nlon; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * nlon + j;
      const double v = s.values[k];
      if (std::abs(v) <= cut) continue;
      bool extremum = true;
      for (int ii = 0; ii < nlat && extremum; ++ii) {
        if (std::abs(s.colatitude[ii] - s.colatitude[i]) > radius) continue;
        for (int jj = 0; jj < nlon; ++jj) {
          const std::size_t q = static_cast<std::size_t>(ii) * nlon + jj;
          if (q == k || x[k] * x[q] + y[k] * y[q] + z[k] * z[q] < cos_r) continue;
          const double u = s.values[q];
          // Ties go to the lower index so a flat top counts once.
          if (v > 0 ? (u > v || (u == v && q < k)) : (u < v || (u == v && q < k))) {
            extremum = false;
            break;
          }
        }
      }
      if (extremum) ++count;
    }
  }
  return count;
}

}  // namespace zeitlin
