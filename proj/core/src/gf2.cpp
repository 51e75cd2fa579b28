#include "eegdec/gf2.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace eegdec {

namespace {

std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

}  // namespace

BitVector::BitVector(std::size_t length) : length_(length), words_(words_for(length), 0) {}

BitVector BitVector::from_string(std::string_view bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] == '1') {
            v.set(i);
        } else if (bits[i] != '0') {
            throw std::invalid_argument("bit string contains character other than 0/1");
        }
    }
    return v;
}

BitVector BitVector::from_support(std::size_t length, std::span<const std::size_t> ones) {
    BitVector v(length);
    for (std::size_t i : ones) {
        if (i >= length) throw std::out_of_range("support index out of range");
        v.flip(i);
    }
    return v;
}

BitVector BitVector::from_uint(std::size_t length, std::uint64_t value) {
    BitVector v(length);
    for (std::size_t i = 0; i < length && i < 64; ++i) {
        if ((value >> i) & 1u) v.set(i);
    }
    return v;
}

void BitVector::clear() { std::fill(words_.begin(), words_.end(), 0); }

BitVector &BitVector::operator^=(const BitVector &other) {
    if (other.length_ != length_) throw std::invalid_argument("BitVector length mismatch");
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
    return *this;
}

BitVector &BitVector::operator&=(const BitVector &other) {
    if (other.length_ != length_) throw std::invalid_argument("BitVector length mismatch");
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
    return *this;
}

bool BitVector::dot(const BitVector &other) const {
    if (other.length_ != length_) throw std::invalid_argument("BitVector length mismatch");
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < words_.size(); ++w) acc ^= words_[w] & other.words_[w];
    return std::popcount(acc) & 1;
}

std::size_t BitVector::popcount() const {
    std::size_t n = 0;
    for (auto w : words_) n += std::popcount(w);
    return n;
}

bool BitVector::none() const {
    return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

std::size_t BitVector::first_set() const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
        if (words_[w]) return w * 64 + std::countr_zero(words_[w]);
    }
    return npos;
}

std::vector<std::size_t> BitVector::support() const {
    std::vector<std::size_t> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
        std::uint64_t word = words_[w];
        while (word) {
            out.push_back(w * 64 + std::countr_zero(word));
            word &= word - 1;
        }
    }
    return out;
}

BitVector BitVector::slice(std::size_t begin, std::size_t count) const {
    if (begin + count > length_) throw std::out_of_range("slice out of range");
    BitVector out(count);
    if (begin % 64 == 0) {
        std::copy_n(words_.begin() + begin / 64, out.words_.size(), out.words_.begin());
        if (count % 64) out.words_.back() &= (std::uint64_t{1} << (count % 64)) - 1;
        return out;
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (get(begin + i)) out.set(i);
    }
    return out;
}

BitVector BitVector::concat(const BitVector &other) const {
    BitVector out(length_ + other.length_);
    std::copy(words_.begin(), words_.end(), out.words_.begin());
    if (length_ % 64 == 0) {
        std::copy(other.words_.begin(), other.words_.end(), out.words_.begin() + words_.size());
        return out;
    }
    for (std::size_t i : other.support()) out.set(length_ + i);
    return out;
}

std::uint64_t BitVector::to_uint() const {
    if (length_ > 64) throw std::invalid_argument("BitVector too long for integer conversion");
    return words_.empty() ? 0 : words_[0];
}

std::string BitVector::to_string() const {
    std::string s(length_, '0');
    for (std::size_t i = 0; i < length_; ++i) {
        if (get(i)) s[i] = '1';
    }
    return s;
}

std::size_t BitVector::hash() const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull ^ length_;
    for (auto w : words_) {
        h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h *= 0xff51afd7ed558ccdull;
    }
    return static_cast<std::size_t>(h ^ (h >> 33));
}

BinaryMatrix::BinaryMatrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, BitVector(cols)) {}

BinaryMatrix BinaryMatrix::identity(std::size_t n) {
    BinaryMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i);
    return m;
}

BinaryMatrix BinaryMatrix::from_rows(std::vector<BitVector> rows, std::size_t cols) {
    for (const auto &r : rows) {
        if (r.size() != cols) throw std::invalid_argument("row length does not match column count");
    }
    BinaryMatrix m;
    m.cols_ = cols;
    m.rows_ = std::move(rows);
    return m;
}

BinaryMatrix BinaryMatrix::from_strings(const std::vector<std::string> &rows) {
    if (rows.empty()) return {};
    std::vector<BitVector> out;
    out.reserve(rows.size());
    for (const auto &r : rows) out.push_back(BitVector::from_string(r));
    return from_rows(std::move(out), rows.front().size());
}

BinaryMatrix BinaryMatrix::from_columns(std::span<const BitVector> columns, std::size_t rows) {
    BinaryMatrix m(rows, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != rows) throw std::invalid_argument("column length mismatch");
        for (std::size_t r : columns[c].support()) m.set(r, c);
    }
    return m;
}

void BinaryMatrix::append_row(BitVector row) {
    if (rows_.empty() && cols_ == 0) cols_ = row.size();
    if (row.size() != cols_) throw std::invalid_argument("row length does not match column count");
    rows_.push_back(std::move(row));
}

BitVector BinaryMatrix::column(std::size_t c) const {
    BitVector out(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
        if (rows_[r].get(c)) out.set(r);
    }
    return out;
}

BinaryMatrix BinaryMatrix::transposed() const {
    BinaryMatrix t(cols_, rows());
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t c : rows_[r].support()) t.set(c, r);
    }
    return t;
}

BinaryMatrix BinaryMatrix::stacked(const BinaryMatrix &below) const {
    if (rows() == 0 && cols_ == 0) return below;
    if (below.rows() == 0 && below.cols_ == 0) return *this;
    if (below.cols_ != cols_) throw std::invalid_argument("stacked: column count mismatch");
    BinaryMatrix out = *this;
    out.rows_.insert(out.rows_.end(), below.rows_.begin(), below.rows_.end());
    return out;
}

BinaryMatrix BinaryMatrix::select_rows(std::span<const std::size_t> indices) const {
    BinaryMatrix out;
    out.cols_ = cols_;
    out.rows_.reserve(indices.size());
    for (std::size_t i : indices) out.rows_.push_back(rows_.at(i));
    return out;
}

BinaryMatrix operator*(const BinaryMatrix &a, const BinaryMatrix &b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: dimension mismatch");
    BinaryMatrix out(a.rows(), b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t k : a.row(r).support()) out.row(r) ^= b.row(k);
    }
    return out;
}

BitVector BinaryMatrix::left_multiply(const BitVector &x) const {
    if (x.size() != rows()) throw std::invalid_argument("left_multiply: dimension mismatch");
    BitVector out(cols_);
    for (std::size_t r : x.support()) out ^= rows_[r];
    return out;
}

BitVector BinaryMatrix::right_multiply(const BitVector &y) const {
    if (y.size() != cols_) throw std::invalid_argument("right_multiply: dimension mismatch");
    BitVector out(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
        if (rows_[r].dot(y)) out.set(r);
    }
    return out;
}

bool BinaryMatrix::is_zero() const {
    return std::all_of(rows_.begin(), rows_.end(), [](const BitVector &r) { return r.none(); });
}

std::size_t BinaryMatrix::popcount() const {
    std::size_t n = 0;
    for (const auto &r : rows_) n += r.popcount();
    return n;
}

SymplecticVector::SymplecticVector(BitVector xs, BitVector zs) : x(std::move(xs)), z(std::move(zs)) {
    if (x.size() != z.size()) throw std::invalid_argument("SymplecticVector: X and Z parts differ in length");
}

SymplecticVector SymplecticVector::from_flat(const BitVector &flat) {
    if (flat.size() % 2) throw std::invalid_argument("SymplecticVector: odd flat length");
    std::size_t n = flat.size() / 2;
    return {flat.slice(0, n), flat.slice(n, n)};
}

bool symplectic_product(const SymplecticVector &a, const SymplecticVector &b) {
    if (a.n() != b.n()) throw std::invalid_argument("symplectic_product: length mismatch");
    return a.x.dot(b.z) ^ a.z.dot(b.x);
}

BinaryMatrix row_reduce(const BinaryMatrix &m, std::vector<std::size_t> *pivots) {
    std::vector<BitVector> rows = m.row_vectors();
    std::vector<std::size_t> piv;
    std::size_t top = 0;
    for (std::size_t c = 0; c < m.cols() && top < rows.size(); ++c) {
        std::size_t word = c >> 6;
        std::uint64_t mask = std::uint64_t{1} << (c & 63);
        std::size_t found = rows.size();
        for (std::size_t r = top; r < rows.size(); ++r) {
            if (rows[r].words()[word] & mask) {
                found = r;
                break;
            }
        }
        if (found == rows.size()) continue;
        // keep relative order of the remaining rows so ties stay deterministic
        std::rotate(rows.begin() + top, rows.begin() + found, rows.begin() + found + 1);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r != top && (rows[r].words()[word] & mask)) rows[r] ^= rows[top];
        }
        piv.push_back(c);
        ++top;
    }
    rows.resize(top);
    if (pivots) *pivots = std::move(piv);
    return BinaryMatrix::from_rows(std::move(rows), m.cols());
}

std::size_t rank(const BinaryMatrix &m) {
    std::vector<BitVector> basis;
    std::vector<std::size_t> pivot;
    for (const auto &row : m.row_vectors()) {
        BitVector v = row;
        for (std::size_t i = 0; i < basis.size(); ++i) {
            if (v.get(pivot[i])) v ^= basis[i];
        }
        std::size_t p = v.first_set();
        if (p != BitVector::npos) {
            basis.push_back(std::move(v));
            pivot.push_back(p);
        }
    }
    return basis.size();
}

BinaryMatrix kernel_basis(const BinaryMatrix &m) {
    std::vector<std::size_t> pivots;
    BinaryMatrix r = row_reduce(m, &pivots);
    std::size_t n = m.cols();
    std::vector<bool> is_pivot(n, false);
    for (std::size_t p : pivots) is_pivot[p] = true;
    std::vector<BitVector> out;
    for (std::size_t free = 0; free < n; ++free) {
        if (is_pivot[free]) continue;
        BitVector v(n);
        v.set(free);
        for (std::size_t i = 0; i < pivots.size(); ++i) {
            if (r.get(i, free)) v.set(pivots[i]);
        }
        out.push_back(std::move(v));
    }
    return BinaryMatrix::from_rows(std::move(out), n);
}

std::optional<BitVector> solve(const BinaryMatrix &m, const BitVector &y) {
    if (y.size() != m.cols()) throw std::invalid_argument("solve: length mismatch");
    return RowSpace(m).solve(y);
}

RowSpace::RowSpace(const BinaryMatrix &m) : cols_(m.cols()), source_rows_(m.rows()) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        BitVector v = m.row(r);
        BitVector combo(source_rows_);
        combo.set(r);
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            if (v.get(pivot_[i])) {
                v ^= basis_[i];
                combo ^= combo_[i];
            }
        }
        std::size_t p = v.first_set();
        if (p == BitVector::npos) continue;
        // keep earlier basis vectors reduced at the new pivot
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            if (basis_[i].get(p)) {
                basis_[i] ^= v;
                combo_[i] ^= combo;
            }
        }
        basis_.push_back(std::move(v));
        combo_.push_back(std::move(combo));
        pivot_.push_back(p);
        independent_.push_back(r);
    }
}

BitVector RowSpace::reduce(const BitVector &v) const {
    if (v.size() != cols_) throw std::invalid_argument("RowSpace: length mismatch");
    BitVector out = v;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        if (out.get(pivot_[i])) out ^= basis_[i];
    }
    return out;
}

bool RowSpace::contains(const BitVector &v) const { return reduce(v).none(); }

std::optional<BitVector> RowSpace::solve(const BitVector &v) const {
    if (v.size() != cols_) throw std::invalid_argument("RowSpace: length mismatch");
    BitVector rest = v;
    BitVector x(source_rows_);
    for (std::size_t i = 0; i < basis_.size(); ++i) {
        if (rest.get(pivot_[i])) {
            rest ^= basis_[i];
            x ^= combo_[i];
        }
    }
    if (rest.any()) return std::nullopt;
    return x;
}

void write_matrix_market(std::ostream &out, const BinaryMatrix &m) {
    out << "%%MatrixMarket matrix coordinate pattern general\n";
    out << m.rows() << ' ' << m.cols() << ' ' << m.popcount() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c : m.row(r).support()) out << r + 1 << ' ' << c + 1 << '\n';
    }
}

BinaryMatrix read_matrix_market(std::istream &in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("%%MatrixMarket matrix coordinate pattern general", 0) != 0) {
        throw std::runtime_error("MatrixMarket: missing or unsupported header");
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '%') break;
    }
    std::istringstream header(line);
    std::size_t rows = 0, cols = 0, nnz = 0;
    if (!(header >> rows >> cols >> nnz)) throw std::runtime_error("MatrixMarket: bad size line");
    BinaryMatrix m(rows, cols);
    for (std::size_t i = 0; i < nnz; ++i) {
        std::size_t r = 0, c = 0;
        if (!(in >> r >> c)) throw std::runtime_error("MatrixMarket: truncated entry list");
        if (r < 1 || r > rows || c < 1 || c > cols) throw std::runtime_error("MatrixMarket: index out of range");
        m.set(r - 1, c - 1);
    }
    return m;
}

}  // namespace eegdec
