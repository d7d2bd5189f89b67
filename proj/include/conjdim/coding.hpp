#pragma once

#include "conjdim/maps.hpp"

#include <span>
#include <string>
#include <vector>

namespace conjdim::coding {

/// Finite word over {1,...,d}; the empty word addresses all of [0,1].
class Word {
public:
  Word() = default;
  explicit Word(std::vector<int> symbols) : symbols_(std::move(symbols)) {}
  Word(std::initializer_list<int> symbols) : symbols_(symbols) {}

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  int operator[](std::size_t i) const { return symbols_[i]; }
  std::span<const int> symbols() const { return symbols_; }
  void push_back(int a) { symbols_.push_back(a); }

  /// Throws ConfigError when a symbol lies outside {1,...,d}.
  void validate(int d) const;
  std::string to_string() const;

  friend bool operator==(const Word&, const Word&) = default;

private:
  std::vector<int> symbols_;
};

struct CylinderInterval {
  Word word;
  double lo = 0.0;
  double hi = 1.0;
  std::string map_label;

  double diameter() const { return hi - lo; }
};

/// Value of the conjugacy with an enclosure: the true value lies in
/// [value - error_bound, value + error_bound].
struct ThetaValue {
  double value = 0.0;
  double error_bound = 0.0;
  int depth = 0;
};

struct Quotient {
  double value = 0.0;
  double error_bound = 0.0;
};

inline constexpr int kThetaMaxDepth = 64;

/// First `depth` digits of xi, obtained by iterating the map.
Word encode(const maps::BranchMap& map, double xi, int depth);

CylinderInterval cylinder(const maps::BranchMap& map, const Word& w);
/// Endpoints of the cylinder of `symbols` as {lo, hi}.
std::pair<double, double> cylinder_bounds(const maps::BranchMap& map, std::span<const int> symbols);
/// log of the cylinder length. Exact sum of log widths for piecewise-linear
/// maps; throws PrecisionError when a smooth cylinder collapses below a few ulp.
double log_cylinder_length(const maps::BranchMap& map, std::span<const int> symbols);

/// Theta = pi_T o pi_S^{-1}, so that T o Theta = Theta o S.
ThetaValue theta(const maps::BranchMap& s, const maps::BranchMap& t, double xi, double tol);

/// (Theta(xi) - Theta(eta)) / (xi - eta). Throws PrecisionError when the
/// propagated error exceeds 10% of the quotient.
Quotient diff_quotient(const maps::BranchMap& s, const maps::BranchMap& t, double xi, double eta, double tol);

struct ThetaRow {
  double xi;
  ThetaValue theta;
};

std::vector<ThetaRow> theta_grid(const maps::BranchMap& s, const maps::BranchMap& t, int points, double tol);
/// CSV body with header `xi,theta,err`.
std::string theta_csv(const std::vector<ThetaRow>& rows);

} // namespace conjdim::coding
