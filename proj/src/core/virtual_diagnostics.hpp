#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/bounce_dynamics.hpp"
#include "core/rng.hpp"
#include "core/species.hpp"

namespace ewsim::virtual_diagnostics {

/// Side-view camera model, post-binning (200 x 200 at 51 um covers the
/// 10.2 x 10.2 mm^2 field of view). x = 0 sits at the horizontal image
/// center; the prism surface (z = 0) sits surface_offset above the bottom
/// edge.
struct CcdSpec {
  int pixels = 200;
  double pixel_pitch = 51e-6;
  double exposure = 0.5e-3;
  double surface_offset = 1.0e-3;
  double photon_yield = 200.0;  // expected counts per atom per frame
  int shots_per_frame = 10;
  bool noise = true;

  double field_of_view() const { return pixels * pixel_pitch; }
  double x_min() const { return -0.5 * field_of_view(); }
  double z_min() const { return -surface_offset; }
  // Column/row of a physical point; row 0 is the top image row.
  int column_of(double x) const;
  int row_of(double z) const;
  void validate() const;

  bool operator==(const CcdSpec&) const = default;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<uint16_t> counts;

  uint16_t at(int row, int col) const { return counts[row * width + col]; }
};

struct Frame {
  double trigger_time = 0;
  Image image;
};

/// Renders the fluorescence frame for one ensemble snapshot: each atom
/// deposits a Gaussian point-spread (sigma = 1 pixel, pixel-integrated via
/// erf) swept along its ballistic motion during the exposure (motion blur).
/// Optional Poisson shot noise emulates shots_per_frame averaged exposures;
/// counts clip to 16 bits.
Image render_frame(const std::vector<bounce_dynamics::AtomState>& atoms,
                   const CcdSpec& ccd, double photon_yield, uint64_t seed,
                   uint32_t frame_index);

struct Region {
  int row0 = 0, row1 = 0, col0 = 0, col1 = 0;  // half-open
  static Region full(const Image& img) { return {0, img.height, 0, img.width}; }
};

struct Centroid {
  double x = 0;    // m
  double z = 0;    // m
  double err = 0;  // m, floored at one pixel
  double err_statistical = 0;  // unfloored count-statistics estimate
  double total_counts = 0;
};

/// Intensity-weighted centroid after border-median background subtraction.
/// The statistical error follows the shot-averaged Poisson model,
/// sigma = spread / sqrt(total * shots_per_frame); the reported err is
/// floored at one pixel.
Centroid centroid(const Image& img, const CcdSpec& ccd, const Region& region);

struct FitLine {
  double velocity = 0;     // slope, m/s
  double intercept = 0;    // position at t = 0, m
  double velocity_err = 0;
  double residual_rms = 0;
  int points = 0;
};

struct TrajectoryFit {
  FitLine pre_bounce;
  FitLine post_bounce;
  double delta_vx = 0;
  double recoils = 0;
  double recoils_err = 0;
  double bounce_time = 0;
  double intercept_mismatch = 0;  // extrapolated position gap at bounce_time
  bool systematics_corrected = false;
};

struct TimedPosition {
  double t;
  double x;
  double err;  // 0 = unweighted
};

/// Independent least-squares lines strictly before and after bounce_time;
/// delta_vx converts to recoil number with hbar kx / M.
TrajectoryFit fit_trajectory(const std::vector<TimedPosition>& centroids,
                             double bounce_time, double kx,
                             const AtomSpecies& species);

/// Removes the prism-tilt and launch-velocity artifacts from the measured
/// recoil number and inflates the error with the stated uncertainties.
/// Refuses to run twice on the same fit.
TrajectoryFit systematics_correction(const TrajectoryFit& fit,
                                     const bounce_dynamics::Systematics& sys,
                                     double v_incident, double kx,
                                     const AtomSpecies& species);

/// 16-bit binary PGM (P5, maxval 65535, big-endian samples).
std::string encode_pgm16(const Image& img);

/// Frame filename pattern: frame_<ms>p<tenths>.pgm (e.g. 36.7 ms ->
/// frame_36p7.pgm).
std::string frame_filename(double trigger_time_s);

}  // namespace ewsim::virtual_diagnostics
