#ifndef PLQFPI_FIXED_SET_HPP
#define PLQFPI_FIXED_SET_HPP

#include <limits>
#include <vector>

#include "plqfpi/projection.hpp"

namespace plqfpi {

/// One polyhedral piece of a fixed-point set: {x : M x = v} intersected with a region.
struct FixedPointPiece {
  PolyhedralSet set;
  int source_piece = -1; // index into the enumerated pieces, -1 when built directly
  Vector witness;        // a certified point of the piece
};

/// The fixed-point set as a finite union of polyhedral pieces.
struct FixedPointSetDescription {
  std::vector<FixedPointPiece> pieces;
  Vector representative;

  bool empty() const { return pieces.empty(); }
  Eigen::Index dimension() const { return representative.size(); }

  static FixedPointSetDescription single_point(const Vector& p)
  {
    const Eigen::Index n = p.size();
    FixedPointPiece piece{PolyhedralSet{Matrix(0, n), Vector(0), Matrix::Identity(n, n), p}, -1, p};
    return {{piece}, p};
  }
};

struct NearestFixedPoint {
  Vector point;
  double distance = std::numeric_limits<double>::infinity();
  int piece = -1;
};

inline NearestFixedPoint nearest_fixed_point(const FixedPointSetDescription& fix, const Vector& x)
{
  require(!fix.empty(), Errc::empty_fixed_set, "distance to an empty fixed-point set");
  NearestFixedPoint best;
  for (std::size_t k = 0; k < fix.pieces.size(); ++k) {
    const Vector p = project_active_set(fix.pieces[k].set, x).point;
    const double d = (x - p).norm();
    if (d < best.distance) best = {p, d, static_cast<int>(k)};
  }
  return best;
}

inline double distance_to_fixed_points(const FixedPointSetDescription& fix, const Vector& x)
{
  return nearest_fixed_point(fix, x).distance;
}

} // namespace plqfpi

#endif // PLQFPI_FIXED_SET_HPP
