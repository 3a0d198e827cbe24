#pragma once

// Fields on an azimuth-elevation grid: Gauss-Legendre colatitudes and
// uniform longitudes.  Row i = 0 is nearest the north pole.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "zeitlin/quantization.hpp"

namespace zeitlin {

struct GridField {
  int n_lat = 0;
  int n_lon = 0;
  std::vector<double> colatitude;  // n_lat, ascending
  std::vector<double> longitude;   // n_lon, 2 pi j / n_lon
  std::vector<double> weight;      // n_lat, quadrature area weight of one node in row i
  std::vector<double> values;      // row-major, n_lat * n_lon
  double imag_residue = 0.0;       // max |Im f| seen during synthesis

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n_lon + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * n_lon + j]; }
  double node_weight(std::size_t idx) const { return weight[idx / n_lon]; }
  double max_abs() const;
  bool same_grid(const GridField& other) const;
};

/// Empty field on the n_lat x n_lon grid (n_lat, n_lon >= 4).
GridField make_grid(int n_lat, int n_lon);

/// f = sum c_lm Y_lm with orthonormal Condon-Shortley spherical harmonics.
GridField synthesize_grid(const SphericalCoefficients& c, int n_lat, int n_lon);

/// Area-weighted L2 norm and inner products of grid fields.
double grid_l2(const GridField& f);
double grid_l2_distance(const GridField& a, const GridField& b);

struct ScatterPoint {
  double p;
  double ws;
  double weight;
};

std::vector<ScatterPoint> scatter_data(const GridField& p_grid, const GridField& ws_grid);

struct StreamlineAverage {
  GridField field;
  int components = 0;
  std::optional<std::string> warning;
};

/// Grid version of averaging omega along the level curves of psi: psi values
/// are cut into n_bins equal-area quantile bins, each bin's nodes are split
/// into 8-connected components (periodic in longitude, pole rings joined),
/// and omega is replaced by its area-weighted mean on every component.
StreamlineAverage streamline_average(const GridField& psi, const GridField& omega, int n_bins);

/// Number of extrema of the 3x3-smoothed field with |value| above
/// `threshold` * max |smoothed field|.  A node counts when it is the strict
/// extremum of its sign over the geodesic disk of angular radius `radius`
/// around it; the disk suppresses ridge points on the rings around a vortex.
int count_blobs(const GridField& f, double threshold = 0.2, double radius = 0.35);

}  // namespace zeitlin
