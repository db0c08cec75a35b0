#pragma once

// Normalized finite atomic measures on H^d and on its boundary.

#include "hyperbary/geometry.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace hyperbary {

inline constexpr double kWeightSumTol = 1e-12;

template <class P>
struct WeightedAtom {
  double weight;
  P point;
};

namespace detail {

template <class P>
void validate_atoms(const std::vector<WeightedAtom<P>>& atoms, const char* what) {
  if (atoms.empty()) throw InvalidArgument(std::string(what) + ": needs at least one atom");
  const int d = atoms.front().point.dim();
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!(a.weight > 0.0) || !std::isfinite(a.weight)) {
      throw InvalidArgument(std::string(what) + ": weights must be positive and finite");
    }
    if (a.point.dim() != d) throw DimensionMismatch(std::string(what) + ": mixed dimensions");
    total += a.weight;
  }
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw InvalidArgument(std::string(what) + ": weights sum to " + std::to_string(total) +
                          ", expected 1");
  }
}

template <class P>
std::vector<WeightedAtom<P>> renormalized(std::vector<WeightedAtom<P>> atoms) {
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  for (auto& a : atoms) a.weight /= total;
  return atoms;
}

}  // namespace detail

class DiscreteMeasure {
 public:
  using Atom = WeightedAtom<Point>;

  explicit DiscreteMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    detail::validate_atoms(atoms_, "DiscreteMeasure");
  }

  /// Rescales positive weights to sum to one before validating.
  static DiscreteMeasure normalized(std::vector<Atom> atoms) {
    return DiscreteMeasure(detail::renormalized(std::move(atoms)));
  }

  static DiscreteMeasure dirac(const Point& p) { return DiscreteMeasure({{1.0, p}}); }

  static DiscreteMeasure uniform(const std::vector<Point>& pts) {
    std::vector<Atom> atoms;
    for (const auto& p : pts) atoms.push_back({1.0 / static_cast<double>(pts.size()), p});
    return normalized(std::move(atoms));
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  int dim() const { return atoms_.front().point.dim(); }
  std::size_t size() const { return atoms_.size(); }

  /// Copy with coincident atoms merged (weights summed).
  DiscreteMeasure merged() const {
    std::vector<Atom> out;
    for (const auto& a : atoms_) {
      bool found = false;
      for (auto& b : out) {
        if (distance(a.point, b.point) < kCoincidentTol) {
          b.weight += a.weight;
          found = true;
          break;
        }
      }
      if (!found) out.push_back(a);
    }
    return DiscreteMeasure(std::move(out));
  }

 private:
  std::vector<Atom> atoms_;
};

class BoundaryMeasure {
 public:
  using Atom = WeightedAtom<BoundaryPoint>;

  explicit BoundaryMeasure(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    detail::validate_atoms(atoms_, "BoundaryMeasure");
  }

  static BoundaryMeasure normalized(std::vector<Atom> atoms) {
    return BoundaryMeasure(detail::renormalized(std::move(atoms)));
  }

  static BoundaryMeasure uniform(const std::vector<BoundaryPoint>& pts) {
    std::vector<Atom> atoms;
    for (const auto& p : pts) atoms.push_back({1.0, p});
    return normalized(std::move(atoms));
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  int dim() const { return atoms_.front().point.dim(); }
  std::size_t size() const { return atoms_.size(); }

  BoundaryMeasure merged() const {
    std::vector<Atom> out;
    for (const auto& a : atoms_) {
      bool found = false;
      for (auto& b : out) {
        if (a.point.approx_equal(b.point)) {
          b.weight += a.weight;
          found = true;
          break;
        }
      }
      if (!found) out.push_back(a);
    }
    return BoundaryMeasure(std::move(out));
  }

  /// Index (into merged()) of the first aggregated atom with weight >= 1/2.
  std::optional<std::size_t> class_u_violation() const {
    const auto m = merged();
    for (std::size_t i = 0; i < m.atoms().size(); ++i) {
      if (m.atoms()[i].weight >= 0.5) return i;
    }
    return std::nullopt;
  }

  /// Every aggregated atom has weight < 1/2 (which forces >= 3 distinct atoms).
  bool in_class_U() const { return !class_u_violation().has_value(); }

 private:
  std::vector<Atom> atoms_;
};

}  // namespace hyperbary
