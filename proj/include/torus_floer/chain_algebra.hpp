#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace floer {

class GF2Matrix {
 public:
  GF2Matrix() = default;
  GF2Matrix(int rows, int cols);
  static GF2Matrix identity(int n);
  static GF2Matrix from_rows(const std::vector<std::vector<int>>& rows);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool get(int r, int c) const;
  void set(int r, int c, bool v);
  void flip(int r, int c);
  bool is_zero() const;

  GF2Matrix operator*(const GF2Matrix& b) const;
  GF2Matrix operator+(const GF2Matrix& b) const;
  bool operator==(const GF2Matrix& b) const;

  /// Gaussian elimination with lowest-index pivots.
  int rank() const;
  int kernel_dim() const { return cols_ - rank(); }
  std::vector<std::vector<int>> to_rows() const;
  std::string to_json() const;

 private:
  using Word = std::uint64_t;
  int words() const { return (cols_ + 63) / 64; }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<Word> bits_;
};

struct Generator {
  int id = -1;
  double action = 0.0;
};

/// Degrees are the mu-grading. boundary[k] maps degree k to degree k-1: its
/// rows are the generators of degree k-1, its columns those of degree k.
struct GradedComplex {
  std::map<int, std::vector<Generator>> generators;
  std::map<int, GF2Matrix> boundary;

  std::vector<int> degrees() const;
  int count(int degree) const;
  /// Boundary out of `degree`, or a zero matrix of the right shape.
  GF2Matrix boundary_at(int degree) const;
  /// Throws a structural error when a stored matrix has the wrong shape.
  void check_shapes() const;
};

struct VerifyReport {
  bool ok = true;
  std::optional<int> failing_degree;
  std::string message;
};

/// d_{k-1} d_k = 0 for every k.
VerifyReport verify_complex(const GradedComplex& c);

/// phi[k] maps C_M degree k to C_F degree k (rows: Floer generators).
/// Checks phi_{k-1} dM_k = dF_k phi_k for all k.
VerifyReport verify_chain_map(const std::map<int, GF2Matrix>& phi, const GradedComplex& cm,
                              const GradedComplex& cf);

/// rank_k = dim ker d_k - rank d_{k+1}. Refuses complexes failing verify_complex.
std::map<int, int> homology_ranks(const GradedComplex& c);

}  // namespace floer
