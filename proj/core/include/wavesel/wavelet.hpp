#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wavesel/geometry.hpp"

namespace wavesel {

/// Orientation of a separable 2D Haar atom: which 1D generator acts on each
/// axis.  SCALING = phi(x)phi(y); H = psi(x)phi(y); V = phi(x)psi(y);
/// D = psi(x)psi(y), with phi = 1 on [0,1) and psi = +1 on [0,1/2),
/// -1 on [1/2,1).
enum class Orientation { Scaling, H, V, D };

const char* orientation_name(Orientation o);
Orientation orientation_from_name(const std::string& name);

/// One dictionary atom: level j and integer shifts (k1, k2), 0 <= k < 2^j.
/// The atom value at t is 2^j * g1(2^j t.x - k1) * g2(2^j t.y - k2), which
/// gives every atom unit L2 norm on the unit square.
struct WaveletIndex {
  int j = 0;
  Orientation orientation = Orientation::Scaling;
  int k1 = 0;
  int k2 = 0;
};

/// Separable 2D Haar dictionary on [0,1]^2: scaling atoms at the coarsest
/// level j0 plus H/V/D detail atoms at levels j0 .. J-1.  Atom order is
/// deterministic: all scaling atoms first (k1 outer, k2 inner), then levels
/// in increasing j with orientations H, V, D, each block row-major in
/// (k1, k2).  Total size R = 4^j0 + 3 * sum_{j=j0}^{J-1} 4^j (= 4^J at j0=0).
///
/// Boundary convention: tiles are half-open, and the coordinate value 1.0
/// belongs to the last tile (likewise the psi sign flip at the tile midpoint
/// uses a half-open split).  Every point of [0,1]^2 therefore lies in exactly
/// one tile per level.
class HaarBasis {
 public:
  /// Throws std::invalid_argument unless 0 <= j0 <= J.
  HaarBasis(int j0, int J);

  int j0() const { return j0_; }
  int J() const { return J_; }
  int size() const { return static_cast<int>(atoms_.size()); }
  const std::vector<WaveletIndex>& atoms() const { return atoms_; }
  const WaveletIndex& atom(int r) const;  ///< throws std::out_of_range

  /// Value of atom r at t (t outside [0,1]^2 or outside the atom tile -> 0).
  double eval_atom(int r, Point t) const;
  /// Value of an arbitrary valid index for this dictionary; throws
  /// std::out_of_range if the index does not belong to the dictionary.
  double eval_atom(const WaveletIndex& idx, Point t) const;

  /// All R atom values at t, in dictionary order.
  Eigen::VectorXd eval_basis(Point t) const;

  /// Rows = points, cols = atoms.  Throws std::domain_error if any point is
  /// outside the unit square.
  Eigen::MatrixXd basis_matrix(std::span<const Point> pts) const;

  /// sum_r coeffs[r] * atom_r(t); coeffs must have length R.
  double reconstruct(const Eigen::VectorXd& coeffs, Point t) const;

  /// Atom dictionary CSV: header "r,j,orientation,k1,k2" with 1-based r.
  void write_atoms_csv(std::ostream& os) const;

 private:
  int j0_;
  int J_;
  std::vector<WaveletIndex> atoms_;
};

}  // namespace wavesel
