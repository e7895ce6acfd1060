#pragma once

// Moment and distribution diagnostics of a particle ensemble.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ktraffic/kernel.hpp"

namespace ktraffic {

/// Particle representation of the speed distribution at kinetic time tau.
struct Ensemble {
  std::vector<double> speeds;
  double tau = 0.0;
  std::uint64_t steps = 0;

  std::size_t size() const noexcept { return speeds.size(); }
  friend bool operator==(const Ensemble&, const Ensemble&) = default;
};

struct MomentSample {
  double tau = 0.0;
  double mean = 0.0;      // V
  double energy = 0.0;    // E
  double variance = 0.0;  // E - V^2, raw (may be -1e-17 from round-off)

  friend bool operator==(const MomentSample&, const MomentSample&) = default;
};

struct MomentSeries {
  std::vector<MomentSample> samples;

  bool empty() const noexcept { return samples.empty(); }
  std::size_t size() const noexcept { return samples.size(); }
  friend bool operator==(const MomentSeries&, const MomentSeries&) = default;
};

/// Empirical mean speed, energy and E - V^2 in a single pass.
inline MomentSample moments(const Ensemble& ens) {
  if (ens.speeds.empty()) throw std::invalid_argument("moments of an empty ensemble");
  double s1 = 0.0;
  double s2 = 0.0;
  for (double v : ens.speeds) {
    s1 += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(ens.speeds.size());
  const double mean = s1 / n;
  const double energy = s2 / n;
  return {ens.tau, mean, energy, energy - mean * mean};
}

/// Macroscopic flux q = rho V.
inline double flux(const MomentSample& sample, Density rho) { return rho.value() * sample.mean; }

/// Variance for human-facing reports: round-off negatives shown as 0.
inline double reported_variance(const MomentSample& sample) {
  return sample.variance < 0.0 ? 0.0 : sample.variance;
}

struct HistogramSlice {
  double tau = 0.0;
  std::vector<double> density;  // per bin, integrates to 1
};

struct HistogramGrid {
  std::vector<double> edges;  // n_bins + 1 equal-width edges over [0,1]
  std::vector<HistogramSlice> slices;

  std::size_t bins() const noexcept { return edges.empty() ? 0 : edges.size() - 1; }
  double bin_width() const noexcept { return 1.0 / static_cast<double>(bins()); }
  double bin_center(std::size_t b) const noexcept { return 0.5 * (edges[b] + edges[b + 1]); }
};

inline std::vector<double> unit_bin_edges(std::size_t n_bins) {
  std::vector<double> edges(n_bins + 1);
  for (std::size_t b = 0; b <= n_bins; ++b) {
    edges[b] = static_cast<double>(b) / static_cast<double>(n_bins);
  }
  return edges;
}

/// Equal-width bins over [0,1], last bin right-closed, unit integral.
inline HistogramSlice histogram(const Ensemble& ens, std::size_t n_bins) {
  if (n_bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  if (ens.speeds.empty()) throw std::invalid_argument("histogram of an empty ensemble");
  std::vector<std::uint64_t> counts(n_bins, 0);
  const double nb = static_cast<double>(n_bins);
  for (double v : ens.speeds) {
    auto b = static_cast<std::size_t>(v * nb);
    if (b >= n_bins) b = n_bins - 1;
    ++counts[b];
  }
  HistogramSlice slice{ens.tau, std::vector<double>(n_bins)};
  const double scale = nb / static_cast<double>(ens.speeds.size());
  for (std::size_t b = 0; b < n_bins; ++b) {
    slice.density[b] = static_cast<double>(counts[b]) * scale;
  }
  return slice;
}

/// Sum of density * bin width; 1 up to round-off for a valid slice.
inline double integral(const HistogramSlice& slice) {
  double total = 0.0;
  for (double d : slice.density) total += d;
  return total / static_cast<double>(slice.density.size());
}

}  // namespace ktraffic
