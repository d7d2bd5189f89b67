#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace conjdim::maps {

enum class MapKind { PiecewiseLinear, Smooth };

enum class Family { Salem, Doubling, Sine, MollifiedSalem, CustomPL };

/// Parsed form of a map description such as `salem:tau=0.2` or
/// `mollified-salem:tau=0.08,n=64`. Breakpoints of `custom-pl` are given as a
/// slash separated list of the interior breakpoints, `custom-pl:breaks=0.3/0.7`.
struct MapSpec {
  Family family = Family::Doubling;
  double tau = 0.0;
  int d = 2;
  int windows = 0;
  std::vector<double> breaks;

  static MapSpec parse(std::string_view text);
  /// Canonical round-trippable form.
  std::string to_string() const;
};

/// Increasing lift F : [0,1] -> [0,d] with F(0) = 0 and F(1) = d. Branch a
/// (1-based) acts on its cell as F - (a - 1).
struct SmoothLift {
  std::function<double(double)> value;
  std::function<double(double)> slope;
  std::function<double(double)> curvature;
};

/// Expanding full-branch map of [0,1] with d increasing branches.
///
/// Symbols are 1-based. A point sitting on an interior breakpoint a_j belongs
/// to the left cell j; 0 belongs to cell 1 and 1 to cell d. Instances are
/// immutable once built and may be shared between threads.
class BranchMap {
public:
  static BranchMap piecewise_linear(std::vector<double> breakpoints, std::string label);
  static BranchMap smooth(int d, SmoothLift lift, std::string label, int grid_points = 0);

  int branches() const { return static_cast<int>(breakpoints_.size()) - 1; }
  MapKind kind() const { return kind_; }
  bool piecewise_linear() const { return kind_ == MapKind::PiecewiseLinear; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  double min_expansion() const { return min_expansion_; }
  double max_expansion() const { return max_expansion_; }
  const std::string& label() const { return label_; }

  int cell_of(double xi) const;
  double forward(double xi) const;
  double derivative(double xi) const;

  /// Point of cell `a` mapped onto `eta`.
  double inverse_branch(int a, double eta) const;
  /// log (S_a^{-1})'(eta), always negative.
  double log_inv_deriv(int a, double eta) const;
  /// Piecewise-linear maps only: log of the width of cell `a`.
  double log_width(int a) const;

  /// Upper bound for the oscillation of log S' over [lo, hi], where the
  /// interval lies inside one cell. Zero for piecewise-linear maps.
  double log_derivative_variation(double lo, double hi) const;

  /// Lift evaluation, exposed for diagnostics of smooth maps.
  double lift(double xi) const;

private:
  BranchMap() = default;
  double lift_slope(double xi) const;
  double log_slope_rate(double xi) const;

  MapKind kind_ = MapKind::PiecewiseLinear;
  std::string label_;
  std::vector<double> breakpoints_;
  std::vector<double> widths_;
  std::vector<double> log_widths_;
  SmoothLift lift_;
  std::vector<double> rate_grid_;  // |F''/F'| on a uniform grid
  std::vector<double> rate_accum_; // running integral of the per-cell maximum
  double min_expansion_ = 0.0;
  double max_expansion_ = 0.0;
};

using MapPtr = std::shared_ptr<const BranchMap>;

BranchMap build(const MapSpec& spec);
MapPtr make_map(const MapSpec& spec);
MapPtr make_map(std::string_view spec_text);

/// Lift of the mollified Salem circle map: the Salem derivative, blended by a
/// raised cosine over windows of width 1/(4n) centred on 0 and tau, rescaled
/// to total mass 2.
SmoothLift mollified_salem_lift(double tau, int windows);
SmoothLift sine_lift(double tau);

} // namespace conjdim::maps
