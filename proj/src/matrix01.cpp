// matrix01.cpp
#include "rrdlab/matrix01.hpp"

#include <bit>
#include <sstream>
#include <stdexcept>

namespace rrdlab {

namespace {
int words_for(int n) { return (n + 63) >> 6; }

void check_index(int n, int i, const char* what) {
  if (i < 0 || i >= n) throw std::out_of_range(std::string(what) + " out of range");
}
}  // namespace

Matrix01::Matrix01(int n) : n_(n), w_(words_for(n)) {
  if (n < 0) throw std::invalid_argument("negative size");
  bits_.assign((size_t)n_ * w_, 0);
  row_sums_.assign(n_, 0);
  col_sums_.assign(n_, 0);
}

Matrix01 Matrix01::identity(int n) {
  Matrix01 m(n);
  for (int i = 0; i < n; ++i) m.set_entry(i, i, true);
  return m;
}

Matrix01 Matrix01::ones(int n) {
  Matrix01 m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.set_entry(i, j, true);
  return m;
}

Matrix01 Matrix01::circulant(int n, int d) {
  if (d < 0 || d > n) throw std::invalid_argument("circulant: bad degree");
  Matrix01 m(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) m.set_entry(i, (i + k) % n, true);
  return m;
}

Matrix01 Matrix01::from_rows(const std::vector<std::vector<int>>& rows) {
  int n = (int)rows.size();
  Matrix01 m(n);
  for (int i = 0; i < n; ++i) {
    if ((int)rows[i].size() != n) throw std::invalid_argument("from_rows: ragged");
    for (int j = 0; j < n; ++j) {
      if (rows[i][j] != 0 && rows[i][j] != 1)
        throw std::invalid_argument("from_rows: entries must be 0 or 1");
      if (rows[i][j]) m.set_entry(i, j, true);
    }
  }
  return m;
}

void Matrix01::set_entry(int i, int j, bool v) {
  check_index(n_, i, "row");
  check_index(n_, j, "col");
  uint64_t& word = bits_[(size_t)i * w_ + (j >> 6)];
  uint64_t mask = 1ULL << (j & 63);
  bool cur = word & mask;
  if (cur == v) return;
  word ^= mask;
  int delta = v ? 1 : -1;
  row_sums_[i] += delta;
  col_sums_[j] += delta;
}

void Matrix01::flip4(int i1, int i2, int j1, int j2) {
  set_entry(i1, j1, !get(i1, j1));
  set_entry(i1, j2, !get(i1, j2));
  set_entry(i2, j1, !get(i2, j1));
  set_entry(i2, j2, !get(i2, j2));
}

void Matrix01::recount() {
  row_sums_.assign(n_, 0);
  col_sums_.assign(n_, 0);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (get(i, j)) {
        ++row_sums_[i];
        ++col_sums_[j];
      }
}

RegularityWitness Matrix01::regularity() const {
  RegularityWitness w;
  if (n_ == 0) return w;
  w.d = row_sums_[0];
  for (int i = 0; i < n_; ++i)
    if (row_sums_[i] != w.d) {
      w.bad_row = i;
      w.d = -1;
      return w;
    }
  for (int j = 0; j < n_; ++j)
    if (col_sums_[j] != w.d) {
      w.bad_col = j;
      w.d = -1;
      return w;
    }
  w.regular = true;
  return w;
}

bool Matrix01::is_regular(int d) const {
  RegularityWitness w = regularity();
  return w.regular && w.d == d;
}

std::vector<int> Matrix01::neighborhood(int i) const {
  check_index(n_, i, "row");
  std::vector<int> out;
  out.reserve(row_sums_[i]);
  const uint64_t* r = row_bits(i);
  for (int w = 0; w < w_; ++w) {
    uint64_t x = r[w];
    while (x) {
      int b = std::countr_zero(x);
      out.push_back(w * 64 + b);
      x &= x - 1;
    }
  }
  return out;
}

std::vector<int> Matrix01::set_neighborhood(const std::vector<int>& S) const {
  std::vector<uint64_t> acc(w_, 0);
  for (int i : S) {
    check_index(n_, i, "row");
    const uint64_t* r = row_bits(i);
    for (int w = 0; w < w_; ++w) acc[w] |= r[w];
  }
  std::vector<int> out;
  for (int w = 0; w < w_; ++w) {
    uint64_t x = acc[w];
    while (x) {
      int b = std::countr_zero(x);
      out.push_back(w * 64 + b);
      x &= x - 1;
    }
  }
  return out;
}

int Matrix01::neighborhood_size(const std::vector<int>& S) const {
  std::vector<uint64_t> acc(w_, 0);
  for (int i : S) {
    const uint64_t* r = row_bits(i);
    for (int w = 0; w < w_; ++w) acc[w] |= r[w];
  }
  int c = 0;
  for (uint64_t x : acc) c += std::popcount(x);
  return c;
}

CoExSets Matrix01::co_ex_sets(int i1, int i2) const {
  check_index(n_, i1, "row");
  check_index(n_, i2, "row");
  CoExSets out;
  const uint64_t* a = row_bits(i1);
  const uint64_t* b = row_bits(i2);
  for (int w = 0; w < w_; ++w) {
    uint64_t both = a[w] & b[w], only1 = a[w] & ~b[w], only2 = b[w] & ~a[w];
    for (uint64_t x = both; x; x &= x - 1) out.co.push_back(w * 64 + std::countr_zero(x));
    for (uint64_t x = only1; x; x &= x - 1) out.ex12.push_back(w * 64 + std::countr_zero(x));
    for (uint64_t x = only2; x; x &= x - 1) out.ex21.push_back(w * 64 + std::countr_zero(x));
  }
  return out;
}

long long Matrix01::edge_count(const std::vector<int>& A,
                               const std::vector<int>& B) const {
  std::vector<uint64_t> mask(w_, 0);
  for (int j : B) {
    check_index(n_, j, "col");
    mask[j >> 6] |= 1ULL << (j & 63);
  }
  long long e = 0;
  for (int i : A) {
    check_index(n_, i, "row");
    const uint64_t* r = row_bits(i);
    for (int w = 0; w < w_; ++w) e += std::popcount(r[w] & mask[w]);
  }
  return e;
}

Matrix01 Matrix01::complement() const {
  Matrix01 m(n_);
  for (int i = 0; i < n_; ++i) {
    uint64_t* dst = &m.bits_[(size_t)i * w_];
    const uint64_t* src = row_bits(i);
    for (int w = 0; w < w_; ++w) dst[w] = ~src[w];
    if (n_ & 63) dst[w_ - 1] &= (1ULL << (n_ & 63)) - 1;
  }
  m.recount();
  return m;
}

Matrix01 Matrix01::transpose() const {
  Matrix01 m(n_);
  for (int i = 0; i < n_; ++i)
    for (int j : neighborhood(i)) m.set_entry(j, i, true);
  return m;
}

IntMat Matrix01::minor(const std::vector<int>& rows,
                       const std::vector<int>& cols) const {
  IntMat out(rows.size(), std::vector<long>(cols.size(), 0));
  for (size_t a = 0; a < rows.size(); ++a) {
    check_index(n_, rows[a], "row");
    for (size_t b = 0; b < cols.size(); ++b) {
      check_index(n_, cols[b], "col");
      out[a][b] = get(rows[a], cols[b]) ? 1 : 0;
    }
  }
  return out;
}

std::string Matrix01::key() const {
  std::string s((const char*)bits_.data(), bits_.size() * sizeof(uint64_t));
  return s;
}

std::string Matrix01::to_text() const {
  RegularityWitness w = regularity();
  std::ostringstream os;
  os << n_ << ' ' << (w.regular ? w.d : -1) << '\n';
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) os << (get(i, j) ? '1' : '0');
    os << '\n';
  }
  return os.str();
}

Matrix01 Matrix01::parse(const std::string& text) {
  std::istringstream is(text);
  int n, d;
  if (!(is >> n >> d)) throw std::invalid_argument("matrix parse: bad header");
  Matrix01 m(n);
  for (int i = 0; i < n; ++i) {
    std::string row;
    if (!(is >> row) || (int)row.size() != n)
      throw std::invalid_argument("matrix parse: bad row");
    for (int j = 0; j < n; ++j) {
      if (row[j] == '1')
        m.set_entry(i, j, true);
      else if (row[j] != '0')
        throw std::invalid_argument("matrix parse: bad char");
    }
  }
  if (d >= 0 && !m.is_regular(d))
    throw std::invalid_argument("matrix parse: header degree mismatch");
  return m;
}

std::string SignedMatrix::to_text() const {
  RegularityWitness w = support.regularity();
  std::ostringstream os;
  int n = support.n();
  os << n << ' ' << (w.regular ? w.d : -1) << '\n';
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int e = entry(i, j);
      os << (e == 0 ? '0' : (e > 0 ? '+' : '-'));
    }
    os << '\n';
  }
  return os.str();
}

SignedMatrix SignedMatrix::parse(const std::string& text) {
  std::istringstream is(text);
  int n, d;
  if (!(is >> n >> d)) throw std::invalid_argument("signed parse: bad header");
  SignedMatrix sm;
  sm.support = Matrix01(n);
  sm.neg.assign((size_t)n * sm.support.words(), 0);
  for (int i = 0; i < n; ++i) {
    std::string row;
    if (!(is >> row) || (int)row.size() != n)
      throw std::invalid_argument("signed parse: bad row");
    for (int j = 0; j < n; ++j) {
      char c = row[j];
      if (c == '0') continue;
      if (c != '+' && c != '-') throw std::invalid_argument("signed parse: bad char");
      sm.support.set_entry(i, j, true);
      if (c == '-')
        sm.neg[(size_t)i * sm.support.words() + (j >> 6)] |= 1ULL << (j & 63);
    }
  }
  if (d >= 0 && !sm.support.is_regular(d))
    throw std::invalid_argument("signed parse: header degree mismatch");
  return sm;
}

SignedMatrix hadamard(const Matrix01& m, const std::vector<int8_t>& signs) {
  int n = m.n();
  if ((int)signs.size() != n * n) throw std::invalid_argument("hadamard: bad sign size");
  SignedMatrix sm;
  sm.support = m;
  sm.neg.assign((size_t)n * m.words(), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (m.get(i, j) && signs[(size_t)i * n + j] < 0)
        sm.neg[(size_t)i * m.words() + (j >> 6)] |= 1ULL << (j & 63);
  return sm;
}

IntMat to_intmat(const Matrix01& m) {
  int n = m.n();
  IntMat a(n, std::vector<long>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j : m.neighborhood(i)) a[i][j] = 1;
  return a;
}

IntMat to_intmat(const SignedMatrix& m) {
  int n = m.n();
  IntMat a(n, std::vector<long>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = m.entry(i, j);
  return a;
}

}  // namespace rrdlab
