#include "core/virtual_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "core/constants.hpp"
#include "core/errors.hpp"

namespace ewsim::virtual_diagnostics {

using constants::g_earth;
using constants::hbar;

void CcdSpec::validate() const {
  if (pixels <= 0 || pixel_pitch <= 0) throw ConfigError("ccd: invalid geometry");
  if (exposure <= 0) throw ConfigError("ccd: exposure must be positive");
  if (shots_per_frame <= 0) throw ConfigError("ccd: shots_per_frame must be positive");
}

int CcdSpec::column_of(double x) const {
  return static_cast<int>(std::floor((x - x_min()) / pixel_pitch));
}

int CcdSpec::row_of(double z) const {
  const double z_top = z_min() + field_of_view();
  return static_cast<int>(std::floor((z_top - z) / pixel_pitch));
}

namespace {

// Gaussian (sigma = 1 px) integrated over a pixel via the erf difference.
inline double pixel_weight(double center_px, int pixel) {
  constexpr double inv_sqrt2 = 0.7071067811865476;
  const double a = (pixel - center_px) * inv_sqrt2;
  const double b = (pixel + 1.0 - center_px) * inv_sqrt2;
  return 0.5 * (std::erf(b) - std::erf(a));
}

}  // namespace

Image render_frame(const std::vector<bounce_dynamics::AtomState>& atoms,
                   const CcdSpec& ccd, double photon_yield, uint64_t seed,
                   uint32_t frame_index) {
  ccd.validate();
  const int n = ccd.pixels;
  std::vector<double> acc(static_cast<size_t>(n) * n, 0.0);

  const double z_top = ccd.z_min() + ccd.field_of_view();
  constexpr int kStamp = 5;  // +- 5 sigma

  for (const auto& atom : atoms) {
    // Substep count follows the motion-blur length so each deposit moves
    // by at most a quarter pixel.
    const double blur =
        std::max(std::abs(atom.v_x), std::abs(atom.v_z) + g_earth * ccd.exposure) *
        ccd.exposure;
    const int nsub = std::clamp(
        static_cast<int>(std::ceil(blur / (0.25 * ccd.pixel_pitch))), 1, 256);
    const double yield_sub = photon_yield / nsub;

    for (int k = 0; k < nsub; ++k) {
      const double dt = ccd.exposure * (k + 0.5) / nsub;
      const double x = atom.x + atom.v_x * dt;
      const double z = atom.z + atom.v_z * dt - 0.5 * g_earth * dt * dt;
      // Fractional pixel coordinates of the deposit center.
      const double cx = (x - ccd.x_min()) / ccd.pixel_pitch;
      const double cz = (z_top - z) / ccd.pixel_pitch;
      if (cx < -kStamp || cx > n + kStamp || cz < -kStamp || cz > n + kStamp) {
        continue;
      }
      const int c0 = std::max(0, static_cast<int>(std::floor(cx)) - kStamp);
      const int c1 = std::min(n - 1, static_cast<int>(std::floor(cx)) + kStamp);
      const int r0 = std::max(0, static_cast<int>(std::floor(cz)) - kStamp);
      const int r1 = std::min(n - 1, static_cast<int>(std::floor(cz)) + kStamp);
      for (int r = r0; r <= r1; ++r) {
        const double wz = pixel_weight(cz, r);
        for (int c = c0; c <= c1; ++c) {
          acc[static_cast<size_t>(r) * n + c] += yield_sub * wz * pixel_weight(cx, c);
        }
      }
    }
  }

  Image img;
  img.width = n;
  img.height = n;
  img.counts.resize(acc.size());
  if (ccd.noise) {
    CounterRng rng(seed, frame_index, RngChannel::FrameNoise);
    const double shots = ccd.shots_per_frame;
    for (size_t i = 0; i < acc.size(); ++i) {
      const double sampled = rng.poisson(acc[i] * shots) / shots;
      img.counts[i] = static_cast<uint16_t>(
          std::clamp(std::llround(sampled), 0LL, 65535LL));
    }
  } else {
    for (size_t i = 0; i < acc.size(); ++i) {
      img.counts[i] = static_cast<uint16_t>(
          std::clamp(std::llround(acc[i]), 0LL, 65535LL));
    }
  }
  return img;
}

Centroid centroid(const Image& img, const CcdSpec& ccd, const Region& region) {
  if (region.row0 >= region.row1 || region.col0 >= region.col1) {
    throw ConfigError("centroid: empty region");
  }
  // Border-median background.
  std::vector<uint16_t> border;
  for (int c = region.col0; c < region.col1; ++c) {
    border.push_back(img.at(region.row0, c));
    border.push_back(img.at(region.row1 - 1, c));
  }
  for (int r = region.row0; r < region.row1; ++r) {
    border.push_back(img.at(r, region.col0));
    border.push_back(img.at(r, region.col1 - 1));
  }
  std::nth_element(border.begin(), border.begin() + border.size() / 2, border.end());
  const double background = border[border.size() / 2];

  double total = 0, sx = 0, sz = 0;
  for (int r = region.row0; r < region.row1; ++r) {
    for (int c = region.col0; c < region.col1; ++c) {
      const double v = std::max(0.0, img.at(r, c) - background);
      total += v;
      sx += v * (c + 0.5);
      sz += v * (r + 0.5);
    }
  }
  if (total <= 0) throw NumericError("centroid: no signal in region");

  const double col = sx / total;
  const double row = sz / total;
  const double z_top = ccd.z_min() + ccd.field_of_view();

  double var = 0;
  for (int r = region.row0; r < region.row1; ++r) {
    for (int c = region.col0; c < region.col1; ++c) {
      const double v = std::max(0.0, img.at(r, c) - background);
      var += v * ((c + 0.5 - col) * (c + 0.5 - col) +
                  (r + 0.5 - row) * (r + 0.5 - row));
    }
  }
  const double spread_px = std::sqrt(var / (2.0 * total));

  Centroid out;
  out.x = ccd.x_min() + col * ccd.pixel_pitch;
  out.z = z_top - row * ccd.pixel_pitch;
  out.err_statistical = ccd.pixel_pitch * spread_px /
                        std::sqrt(total * ccd.shots_per_frame);
  out.err = std::max(ccd.pixel_pitch, out.err_statistical);
  out.total_counts = total;
  return out;
}

namespace {

FitLine least_squares(const std::vector<TimedPosition>& pts) {
  FitLine line;
  line.points = static_cast<int>(pts.size());
  double sw = 0, st = 0, sx = 0, stt = 0, stx = 0;
  for (const auto& p : pts) {
    const double w = p.err > 0 ? 1.0 / (p.err * p.err) : 1.0;
    sw += w;
    st += w * p.t;
    sx += w * p.x;
    stt += w * p.t * p.t;
    stx += w * p.t * p.x;
  }
  const double denom = sw * stt - st * st;
  if (denom <= 0 || !std::isfinite(denom)) {
    throw NumericError("trajectory fit: rank-deficient segment (identical times?)");
  }
  line.velocity = (sw * stx - st * sx) / denom;
  line.intercept = (stt * sx - st * stx) / denom;

  double chi2 = 0;
  for (const auto& p : pts) {
    const double w = p.err > 0 ? 1.0 / (p.err * p.err) : 1.0;
    const double r = p.x - (line.intercept + line.velocity * p.t);
    chi2 += w * r * r;
  }
  line.residual_rms = std::sqrt(chi2 / pts.size());
  // Slope variance: 1/denom * sw scaled by reduced chi^2 when dof > 0.
  const double dof = std::max(1.0, pts.size() - 2.0);
  line.velocity_err = std::sqrt(sw / denom * std::max(chi2 / dof, 1e-300));
  if (pts.size() == 2) line.velocity_err = 0.0;
  return line;
}

}  // namespace

TrajectoryFit fit_trajectory(const std::vector<TimedPosition>& centroids,
                             double bounce_time, double kx,
                             const AtomSpecies& species) {
  std::vector<TimedPosition> pre, post;
  for (const auto& p : centroids) {
    if (p.t < bounce_time) pre.push_back(p);
    else if (p.t > bounce_time) post.push_back(p);
  }
  if (pre.size() < 2 || post.size() < 2) {
    throw ConfigError("trajectory fit: need at least two points strictly on "
                      "each side of the bounce time");
  }

  TrajectoryFit fit;
  fit.bounce_time = bounce_time;
  fit.pre_bounce = least_squares(pre);
  fit.post_bounce = least_squares(post);
  fit.delta_vx = fit.post_bounce.velocity - fit.pre_bounce.velocity;
  const double v_recoil = hbar * kx / species.mass;
  fit.recoils = fit.delta_vx / v_recoil;
  fit.recoils_err = std::sqrt(fit.pre_bounce.velocity_err * fit.pre_bounce.velocity_err +
                              fit.post_bounce.velocity_err * fit.post_bounce.velocity_err) /
                    v_recoil;
  fit.intercept_mismatch =
      (fit.post_bounce.intercept + fit.post_bounce.velocity * bounce_time) -
      (fit.pre_bounce.intercept + fit.pre_bounce.velocity * bounce_time);
  return fit;
}

TrajectoryFit systematics_correction(const TrajectoryFit& fit,
                                     const bounce_dynamics::Systematics& sys,
                                     double v_incident, double kx,
                                     const AtomSpecies& species) {
  if (fit.systematics_corrected) {
    throw ConfigError("systematics correction already applied to this fit");
  }
  TrajectoryFit out = fit;
  const double v_recoil = hbar * kx / species.mass;
  const double tilt_recoils =
      2.0 * std::abs(v_incident) * std::sin(sys.prism_tilt) *
      std::cos(sys.prism_tilt) / v_recoil;
  const double launch_recoils = sys.launch_velocity / v_recoil;
  out.recoils -= tilt_recoils + launch_recoils;

  const double tilt_err = 2.0 * std::abs(v_incident) *
                          std::abs(std::cos(2.0 * sys.prism_tilt)) *
                          sys.prism_tilt_uncertainty / v_recoil;
  const double launch_err = sys.launch_velocity_uncertainty / v_recoil;
  out.recoils_err = std::sqrt(out.recoils_err * out.recoils_err +
                              tilt_err * tilt_err + launch_err * launch_err);
  out.systematics_corrected = true;
  return out;
}

std::string encode_pgm16(const Image& img) {
  char header[64];
  std::snprintf(header, sizeof(header), "P5\n%d %d\n65535\n", img.width, img.height);
  std::string out(header);
  out.reserve(out.size() + img.counts.size() * 2);
  for (uint16_t v : img.counts) {
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xFF));
  }
  return out;
}

std::string frame_filename(double trigger_time_s) {
  const double ms = trigger_time_s * 1e3;
  const long tenths = std::lround(ms * 10.0);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "frame_%ldp%ld.pgm", tenths / 10,
                std::labs(tenths % 10));
  return buf;
}

}  // namespace ewsim::virtual_diagnostics
