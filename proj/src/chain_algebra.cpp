#include "torus_floer/chain_algebra.hpp"

#include <bit>
#include <set>
#include <sstream>

#include "torus_floer/errors.hpp"

namespace floer {

GF2Matrix::GF2Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) throw Error(ErrorKind::Dimension, "chain_algebra", "negative shape");
  bits_.assign(static_cast<std::size_t>(rows) * words(), 0);
}

GF2Matrix GF2Matrix::identity(int n) {
  GF2Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

GF2Matrix GF2Matrix::from_rows(const std::vector<std::vector<int>>& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r ? static_cast<int>(rows[0].size()) : 0;
  GF2Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != c)
      throw Error(ErrorKind::Dimension, "chain_algebra", "ragged rows");
    for (int j = 0; j < c; ++j) m.set(i, j, rows[i][j] & 1);
  }
  return m;
}

bool GF2Matrix::get(int r, int c) const {
  return (bits_[static_cast<std::size_t>(r) * words() + c / 64] >> (c % 64)) & 1u;
}

void GF2Matrix::set(int r, int c, bool v) {
  Word& w = bits_[static_cast<std::size_t>(r) * words() + c / 64];
  const Word mask = Word{1} << (c % 64);
  w = v ? (w | mask) : (w & ~mask);
}

void GF2Matrix::flip(int r, int c) {
  bits_[static_cast<std::size_t>(r) * words() + c / 64] ^= Word{1} << (c % 64);
}

bool GF2Matrix::is_zero() const {
  for (Word w : bits_)
    if (w) return false;
  return true;
}

GF2Matrix GF2Matrix::operator*(const GF2Matrix& b) const {
  if (cols_ != b.rows_) throw Error(ErrorKind::Dimension, "chain_algebra", "product shape mismatch");
  GF2Matrix out(rows_, b.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k)
      if (get(i, k))
        for (int w = 0; w < b.words(); ++w)
          out.bits_[static_cast<std::size_t>(i) * out.words() + w] ^=
              b.bits_[static_cast<std::size_t>(k) * b.words() + w];
  return out;
}

GF2Matrix GF2Matrix::operator+(const GF2Matrix& b) const {
  if (rows_ != b.rows_ || cols_ != b.cols_)
    throw Error(ErrorKind::Dimension, "chain_algebra", "sum shape mismatch");
  GF2Matrix out = *this;
  for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] ^= b.bits_[i];
  return out;
}

bool GF2Matrix::operator==(const GF2Matrix& b) const {
  return rows_ == b.rows_ && cols_ == b.cols_ && bits_ == b.bits_;
}

int GF2Matrix::rank() const {
  GF2Matrix m = *this;
  int rank = 0;
  for (int c = 0; c < cols_ && rank < rows_; ++c) {
    int pivot = -1;
    for (int r = rank; r < rows_; ++r)
      if (m.get(r, c)) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    if (pivot != rank)
      for (int w = 0; w < words(); ++w)
        std::swap(m.bits_[static_cast<std::size_t>(pivot) * words() + w],
                  m.bits_[static_cast<std::size_t>(rank) * words() + w]);
    for (int r = 0; r < rows_; ++r)
      if (r != rank && m.get(r, c))
        for (int w = 0; w < words(); ++w)
          m.bits_[static_cast<std::size_t>(r) * words() + w] ^=
              m.bits_[static_cast<std::size_t>(rank) * words() + w];
    ++rank;
  }
  return rank;
}

std::vector<std::vector<int>> GF2Matrix::to_rows() const {
  std::vector<std::vector<int>> out(rows_, std::vector<int>(cols_, 0));
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out[i][j] = get(i, j) ? 1 : 0;
  return out;
}

std::string GF2Matrix::to_json() const {
  std::ostringstream os;
  os << "{\"rows\":" << rows_ << ",\"cols\":" << cols_ << ",\"entries\":[";
  for (int i = 0; i < rows_; ++i) {
    os << (i ? "," : "") << '[';
    for (int j = 0; j < cols_; ++j) os << (j ? "," : "") << (get(i, j) ? 1 : 0);
    os << ']';
  }
  os << "]}";
  return os.str();
}

std::vector<int> GradedComplex::degrees() const {
  std::set<int> d;
  for (const auto& [k, g] : generators) d.insert(k);
  return {d.begin(), d.end()};
}

int GradedComplex::count(int degree) const {
  auto it = generators.find(degree);
  return it == generators.end() ? 0 : static_cast<int>(it->second.size());
}

GF2Matrix GradedComplex::boundary_at(int degree) const {
  auto it = boundary.find(degree);
  if (it != boundary.end()) return it->second;
  return GF2Matrix(count(degree - 1), count(degree));
}

void GradedComplex::check_shapes() const {
  for (const auto& [k, m] : boundary) {
    if (m.rows() != count(k - 1) || m.cols() != count(k)) {
      std::ostringstream os;
      os << "boundary out of degree " << k << " has shape " << m.rows() << "x" << m.cols()
         << ", expected " << count(k - 1) << "x" << count(k);
      throw Error(ErrorKind::Structural, "chain_algebra", os.str());
    }
  }
}

VerifyReport verify_complex(const GradedComplex& c) {
  c.check_shapes();
  VerifyReport rep;
  for (int k : c.degrees()) {
    const GF2Matrix dd = c.boundary_at(k - 1) * c.boundary_at(k);
    if (!dd.is_zero()) {
      rep.ok = false;
      rep.failing_degree = k;
      rep.message = "d_{k-1} d_k != 0 at degree " + std::to_string(k);
      return rep;
    }
  }
  return rep;
}

VerifyReport verify_chain_map(const std::map<int, GF2Matrix>& phi, const GradedComplex& cm,
                              const GradedComplex& cf) {
  cm.check_shapes();
  cf.check_shapes();
  std::set<int> degrees;
  for (int k : cm.degrees()) degrees.insert(k);
  for (int k : cf.degrees()) degrees.insert(k);
  auto phi_at = [&](int k) {
    auto it = phi.find(k);
    if (it != phi.end()) {
      if (it->second.rows() != cf.count(k) || it->second.cols() != cm.count(k))
        throw Error(ErrorKind::Dimension, "chain_algebra",
                    "chain map shape mismatch at degree " + std::to_string(k));
      return it->second;
    }
    return GF2Matrix(cf.count(k), cm.count(k));
  };
  VerifyReport rep;
  for (int k : degrees) {
    const GF2Matrix lhs = phi_at(k - 1) * cm.boundary_at(k);
    const GF2Matrix rhs = cf.boundary_at(k) * phi_at(k);
    if (!(lhs == rhs)) {
      rep.ok = false;
      rep.failing_degree = k;
      rep.message = "Phi d^M != d^F Phi at degree " + std::to_string(k);
      return rep;
    }
  }
  return rep;
}

std::map<int, int> homology_ranks(const GradedComplex& c) {
  const VerifyReport rep = verify_complex(c);
  if (!rep.ok)
    throw Error(ErrorKind::Structural, "chain_algebra",
                "refusing homology of a non-complex: " + rep.message);
  std::map<int, int> out;
  for (int k : c.degrees()) out[k] = c.boundary_at(k).kernel_dim() - c.boundary_at(k + 1).rank();
  return out;
}

}  // namespace floer
