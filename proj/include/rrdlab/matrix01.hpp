// matrix01.hpp - bit-packed square 0/1 matrices with cached row/column sums,
// plus the sign-overlay type. Indices are 0-based everywhere in the library;
// only the report/CLI layer renders them 1-based.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rrdlab {

using IntMat = std::vector<std::vector<long>>;  // small exact integer entries

struct RegularityWitness {
  bool regular = false;
  int d = -1;        // common degree when regular
  int bad_row = -1;  // first offending index otherwise (-1 if rows fine)
  int bad_col = -1;
};

struct CoExSets {
  std::vector<int> co;    // columns carried by both rows
  std::vector<int> ex12;  // columns only in the first row
  std::vector<int> ex21;  // columns only in the second row
};

class Matrix01 {
 public:
  Matrix01() = default;
  explicit Matrix01(int n);

  static Matrix01 zero(int n) { return Matrix01(n); }
  static Matrix01 identity(int n);
  static Matrix01 ones(int n);
  // row i has ones at columns i, i+1, ..., i+d-1 (mod n)
  static Matrix01 circulant(int n, int d);
  static Matrix01 from_rows(const std::vector<std::vector<int>>& rows);

  int n() const { return n_; }
  int words() const { return w_; }

  bool get(int i, int j) const {
    return (bits_[(size_t)i * w_ + (j >> 6)] >> (j & 63)) & 1u;
  }
  void set_entry(int i, int j, bool v);
  // 2x2 switch at (i1,i2)x(j1,j2): flips all four entries, sums invariant
  void flip4(int i1, int i2, int j1, int j2);

  int row_sum(int i) const { return row_sums_[i]; }
  int col_sum(int j) const { return col_sums_[j]; }
  const uint64_t* row_bits(int i) const { return &bits_[(size_t)i * w_]; }

  RegularityWitness regularity() const;
  bool is_regular(int d) const;

  std::vector<int> neighborhood(int i) const;                    // N(i)
  std::vector<int> set_neighborhood(const std::vector<int>& S) const;  // N(S)
  int neighborhood_size(const std::vector<int>& S) const;        // |N(S)|
  CoExSets co_ex_sets(int i1, int i2) const;
  // edges from row set A into column set B
  long long edge_count(const std::vector<int>& A, const std::vector<int>& B) const;

  Matrix01 complement() const;  // J - M
  Matrix01 transpose() const;
  // submatrix in caller-given order (rows/cols may repeat or be unsorted)
  IntMat minor(const std::vector<int>& rows, const std::vector<int>& cols) const;

  bool operator==(const Matrix01& o) const {
    return n_ == o.n_ && bits_ == o.bits_;
  }
  bool operator!=(const Matrix01& o) const { return !(*this == o); }
  std::string key() const;  // canonical bytes for hashing

  // text format: "n d" header then n rows over {0,1}; d = -1 if not regular
  std::string to_text() const;
  static Matrix01 parse(const std::string& text);

 private:
  int n_ = 0, w_ = 0;
  std::vector<uint64_t> bits_;
  std::vector<int> row_sums_, col_sums_;
  void recount();
};

// sign overlay on the support of a 0/1 matrix; entries in {-1, 0, +1}
struct SignedMatrix {
  Matrix01 support;
  std::vector<uint64_t> neg;  // bit set => entry is -1 (only meaningful on support)

  int n() const { return support.n(); }
  int entry(int i, int j) const {
    if (!support.get(i, j)) return 0;
    return (neg[(size_t)i * support.words() + (j >> 6)] >> (j & 63)) & 1u ? -1 : 1;
  }
  // text format: "n d" header then rows over {-,0,+}
  std::string to_text() const;
  static SignedMatrix parse(const std::string& text);
};

// entrywise product of a 0/1 matrix with a full +-1 sign matrix (row-major, n*n)
SignedMatrix hadamard(const Matrix01& m, const std::vector<int8_t>& signs);

IntMat to_intmat(const Matrix01& m);
IntMat to_intmat(const SignedMatrix& m);

}  // namespace rrdlab
