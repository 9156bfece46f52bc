#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "specflow/kernels.hpp"
#include "specflow/measure.hpp"
#include "specflow/rng.hpp"

namespace specflow {

// Finite window of the product space R*+ x R x Z, with the base space Z
// realized as a circle of circumference L so the flow never exits. A window
// with y_lo == y_hi drops the y coordinate (the original single-factor
// construction over kappa x nu); points then carry y = y_lo.
struct FlowWindow {
  double s_lo, s_hi;
  double y_lo, y_hi;
  double circle_len;

  bool degenerate_y() const { return y_lo == y_hi; }
  double y_extent() const { return degenerate_y() ? 1.0 : y_hi - y_lo; }
  void validate() const;
};

// A box K = s-range x y-range x z-arc; the cylinder sets [K, j] are counted
// against it.
struct SubWindow {
  double s_lo, s_hi;
  double y_lo, y_hi;
  double z_lo, z_hi;

  bool disjoint(const SubWindow& other) const;
  bool contains(double s, double y, double z) const;
};

struct Point {
  double s, y, z;
};

// A sampled Poisson configuration: finite multiset of points with the window
// it was drawn on. Flow and conjugacy images may move y (and s) outside the
// window; the window stays attached as sampling metadata.
struct PointConfig {
  std::vector<Point> points;
  FlowWindow window;
};

// The measure kappa on R*+ in one of its supported representations.
// Probability kinds: lognormal (normal in the log chart), uniform on [a,b]
// in linear coordinates, grid (log chart), atoms (linear positions).
// "haar" is the improper windowed Haar measure of R*+ (uniform in the log
// chart) used to reproduce the total-self-similarity example; its density
// ratio is identically 1, so the conjugating map needs no y compensation.
// Reports must label it improper.
class Kappa {
 public:
  static Kappa lognormal(double mu, double sigma);
  static Kappa uniform(double a, double b);
  static Kappa haar(double a, double b);
  static Kappa from_grid(GridDensity log_chart_density);
  static Kappa from_atoms(AtomicMeasure atoms_in_s);

  bool improper() const { return kind_ == Kind::Haar; }
  bool is_atomic() const { return kind_ == Kind::Atoms; }
  bool is_grid() const { return kind_ == Kind::Grid; }
  bool parametric() const {
    return kind_ == Kind::Lognormal || kind_ == Kind::Uniform || kind_ == Kind::Haar;
  }
  const GridDensity& grid() const;
  double mass() const;
  double mass_in(double s_lo, double s_hi) const;

  // A log-chart window generous enough to hold the measure and its translate
  // by log h (used by the group test's automatic rasterization).
  std::pair<double, double> default_log_window(double log_h) const;

  // Inverse-CDF sampler for kappa restricted to [s_lo, s_hi]; build once,
  // then safe for concurrent use with per-trial engines.
  std::function<double(rng::Engine&)> sampler(double s_lo, double s_hi) const;

  // d kappa / d kappa_h at s, with kappa_h the image of kappa under
  // multiplicative translation, in the convention that makes
  // Q(s,y,z) = (h s, y * ratio(s), z) measure preserving: in the log chart
  // ratio(t) = f(t) / f(t + log h). Throws NumericGuardError where the ratio
  // is undefined or vanishes (h outside the quasi-invariance group).
  double density_ratio(double s, double h) const;

  GridDensity rasterize_log(double lo, double hi, std::size_t cells) const;

  // Quadrature nodes (s_i, w_i) of the representation itself (grid cells or
  // atoms). Parametric kinds must be rasterized first.
  std::vector<std::pair<double, double>> quadrature_nodes() const;

  std::string describe() const;

 private:
  enum class Kind { Lognormal, Uniform, Haar, Grid, Atoms };
  Kappa() = default;
  Kind kind_ = Kind::Lognormal;
  double mu_ = 0.0, sg_ = 1.0;  // lognormal
  double a_ = 1.0, b_ = 2.0;    // uniform / lebesgue
  std::optional<GridDensity> grid_;
  std::optional<AtomicMeasure> atoms_;
};

struct ProductFlowSpec {
  Kappa kappa;
  FlowWindow window;
};

// kappa(s-range) * |y-range| * L (y factor dropped in degenerate mode).
double window_intensity(const ProductFlowSpec& spec);

// Poisson sample of the window: count ~ Poisson(mu(W)), points i.i.d. from
// the normalized restriction (s by inverse CDF, y and z uniform).
PointConfig sample_poisson(const ProductFlowSpec& spec, std::uint64_t seed);

// T_t(s,y,z) = (s, y, z + s t mod L).
PointConfig apply_flow(const ProductFlowSpec& spec, double t, const PointConfig& cfg);

// Q(s,y,z) = (h s, y * (d kappa / d kappa_h)(s), z); q_transform(1/h) is the
// exact inverse.
PointConfig q_transform(const ProductFlowSpec& spec, double h, const PointConfig& cfg);

std::size_t count_in(const PointConfig& cfg, const SubWindow& k);

// --- cylinder-law verification -------------------------------------------

struct BandRow {
  std::string name;
  std::string parameter;
  double theoretical, empirical, band_lo, band_hi;
  bool pass;
};

struct CylinderOptions {
  int j_max = 8;
  std::size_t trials = 100000;
  std::vector<double> flow_times = {0.7, 1.9, 3.3};
  double chi2_p_threshold = 1e-3;
};

// Empirical (c1) bands for K and K', the (c2) count covariance and joint
// independence chi-square, Poisson tail emptiness, and count-law invariance
// under the flow on the full-circle cylinder over K.
std::vector<BandRow> cylinder_verify(const ProductFlowSpec& spec, const SubWindow& k,
                                     const SubWindow& k_prime, const CylinderOptions& opt,
                                     std::uint64_t seed,
                                     std::optional<kernels::Exec> exec = std::nullopt);

// --- kappa quasi-invariance test ------------------------------------------

struct KappaGroupOptions {
  double log_window_lo = 0.0, log_window_hi = 0.0;  // 0,0 -> auto per kind
  std::size_t cells = 8192;
  double affinity_threshold = 1e-3;
  double support_density_eps = 1e-12;  // cells below this do not count as support
  double support_mass_tol = 1e-6;      // mass allowed outside the other's support
};

struct KappaGroupResult {
  double affinity;
  bool support_match;
  bool member_evidence;
};

// Compares kappa with its multiplicative translate by h: affinity plus a
// mass-weighted mutual support check (cell-wise containment is ill-posed for
// decaying densities, so supports match when each measure puts less than
// support_mass_tol of its mass where the other's density is below eps).
KappaGroupResult kappa_group_test(const Kappa& kappa, double h,
                                  const KappaGroupOptions& opt = {});

// --- conjugacy and measure preservation ------------------------------------

struct ConjugacyOptions {
  std::size_t triples = 1000;
  double t_max = 5.0;
  double log_h_max = 1.0;  // h drawn from exp(Uniform[-log_h_max, log_h_max])
};

struct ConjugacyResult {
  double max_conjugacy_err;  // max coordinate error of Q^{-1} T_t Q vs T_{ht}
  double max_inverse_err;    // max coordinate error of q_transform(1/h) o q_transform(h)
};

// z coordinates are compared with the circular metric.
ConjugacyResult conjugacy_check(const ProductFlowSpec& spec, const ConjugacyOptions& opt,
                                std::uint64_t seed);

struct QPreservationOptions {
  double h = 1.6487212707001282;  // e^{1/2}
  std::size_t samples = 100000;
  // Comparison sub-window in (t = log s, y). It must be covered by the
  // window AND by its Q-image: y_hi <= (window y_hi) * min D over the
  // preimage t-range, otherwise mapped mass is missing by construction.
  double t_lo = -1.0, t_hi = 1.0;
  double y_lo = 0.1, y_hi = 1.5;
  std::size_t bins_t = 8, bins_y = 8;
};

struct QPreservationResult {
  double chi2_statistic;
  int dof;
  double pvalue;
};

// Pushes samples of kappa x Uniform(y-range) through (s,y) -> (hs, y D(s))
// and compares the histogram on the sub-window against the untransformed
// sample ("Q preserves mu", checked in distribution).
QPreservationResult q_preservation_check(const ProductFlowSpec& spec,
                                         const QPreservationOptions& opt, std::uint64_t seed);

// --- the tau formula --------------------------------------------------------

struct TauOptions {
  double target_lo = 0.0, target_hi = 0.0;  // 0,0 -> auto
  std::size_t target_cells = 0;             // 0 -> auto
  std::size_t orthogonality_probes = 5;     // affinity diagnostics at sampled s != 1
};

struct TauResult {
  GridDensity tau;
  double expected_mass;                                 // sigma mass * kappa mass
  std::vector<std::pair<double, double>> orthogonality; // (s, affinity(sigma, sigma_s))
};

// tau = integral over s of sigma_s d kappa(s), realized as the weighted sum
// of scale-pushforwards over kappa's quadrature nodes. kappa = delta_1
// reproduces sigma_V exactly (same grid, same values).
TauResult tau_spectral(const GridDensity& sigma_v, const Kappa& kappa,
                       const TauOptions& opt = {});
TauResult tau_spectral(const AtomicMeasure& sigma_v, const Kappa& kappa,
                       const TauOptions& opt = {});

}  // namespace specflow
