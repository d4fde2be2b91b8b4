#include "wavesel/wavelet.hpp"

#include <ostream>
#include <stdexcept>

namespace wavesel {

const char* orientation_name(Orientation o) {
  switch (o) {
    case Orientation::Scaling: return "SCALING";
    case Orientation::H: return "H";
    case Orientation::V: return "V";
    case Orientation::D: return "D";
  }
  throw std::logic_error("orientation_name: bad enum");
}

Orientation orientation_from_name(const std::string& name) {
  if (name == "SCALING") return Orientation::Scaling;
  if (name == "H") return Orientation::H;
  if (name == "V") return Orientation::V;
  if (name == "D") return Orientation::D;
  throw std::invalid_argument("unknown orientation: " + name);
}

HaarBasis::HaarBasis(int j0, int J) : j0_(j0), J_(J) {
  if (j0 < 0 || J < j0) throw std::invalid_argument("HaarBasis: require 0 <= j0 <= J");
  int n0 = 1 << j0;
  for (int k1 = 0; k1 < n0; ++k1)
    for (int k2 = 0; k2 < n0; ++k2)
      atoms_.push_back({j0, Orientation::Scaling, k1, k2});
  for (int j = j0; j < J; ++j) {
    int n = 1 << j;
    for (Orientation o : {Orientation::H, Orientation::V, Orientation::D})
      for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = 0; k2 < n; ++k2)
          atoms_.push_back({j, o, k1, k2});
  }
}

const WaveletIndex& HaarBasis::atom(int r) const {
  if (r < 0 || r >= size()) throw std::out_of_range("HaarBasis::atom: index out of range");
  return atoms_[static_cast<size_t>(r)];
}

namespace {

// Unchecked atom value; assumes a structurally valid index.
double atom_value(const WaveletIndex& a, Point t) {
  if (t.x < 0.0 || t.x > 1.0 || t.y < 0.0 || t.y > 1.0) return 0.0;
  int n = 1 << a.j;
  if (cell_index(t.x, 0.0, 1.0, n) != a.k1) return 0.0;
  if (cell_index(t.y, 0.0, 1.0, n) != a.k2) return 0.0;
  double scale = static_cast<double>(n);
  double v = scale;  // 2^(j/2) per axis
  if (a.orientation == Orientation::H || a.orientation == Orientation::D) {
    double u = scale * t.x - a.k1;  // local coordinate in [0,1]
    v *= (u < 0.5) ? 1.0 : -1.0;
  }
  if (a.orientation == Orientation::V || a.orientation == Orientation::D) {
    double u = scale * t.y - a.k2;
    v *= (u < 0.5) ? 1.0 : -1.0;
  }
  return v;
}

}  // namespace

double HaarBasis::eval_atom(int r, Point t) const { return atom_value(atom(r), t); }

double HaarBasis::eval_atom(const WaveletIndex& idx, Point t) const {
  bool scaling = idx.orientation == Orientation::Scaling;
  bool level_ok = scaling ? idx.j == j0_ : (idx.j >= j0_ && idx.j < J_);
  int n = 1 << idx.j;
  if (!level_ok || idx.k1 < 0 || idx.k1 >= n || idx.k2 < 0 || idx.k2 >= n)
    throw std::out_of_range("HaarBasis::eval_atom: index not in dictionary");
  return atom_value(idx, t);
}

Eigen::VectorXd HaarBasis::eval_basis(Point t) const {
  Eigen::VectorXd v(size());
  for (int r = 0; r < size(); ++r) v[r] = atom_value(atoms_[static_cast<size_t>(r)], t);
  return v;
}

Eigen::MatrixXd HaarBasis::basis_matrix(std::span<const Point> pts) const {
  Eigen::MatrixXd B(static_cast<Eigen::Index>(pts.size()), size());
  for (size_t i = 0; i < pts.size(); ++i) {
    const Point& t = pts[i];
    if (t.x < 0.0 || t.x > 1.0 || t.y < 0.0 || t.y > 1.0)
      throw std::domain_error("basis_matrix: point outside the unit square");
    B.row(static_cast<Eigen::Index>(i)) = eval_basis(t).transpose();
  }
  return B;
}

double HaarBasis::reconstruct(const Eigen::VectorXd& coeffs, Point t) const {
  if (coeffs.size() != size())
    throw std::invalid_argument("reconstruct: coefficient length != dictionary size");
  double acc = 0.0;
  for (int r = 0; r < size(); ++r) {
    double a = atom_value(atoms_[static_cast<size_t>(r)], t);
    if (a != 0.0) acc += coeffs[r] * a;
  }
  return acc;
}

void HaarBasis::write_atoms_csv(std::ostream& os) const {
  os << "r,j,orientation,k1,k2\n";
  for (int r = 0; r < size(); ++r) {
    const WaveletIndex& a = atoms_[static_cast<size_t>(r)];
    os << (r + 1) << ',' << a.j << ',' << orientation_name(a.orientation) << ',' << a.k1 << ','
       << a.k2 << '\n';
  }
}

}  // namespace wavesel
