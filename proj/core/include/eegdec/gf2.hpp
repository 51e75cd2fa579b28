#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eegdec {

/// Fixed-length vector over F2, packed into 64-bit words.
///
/// Bits beyond `size()` in the last word are kept at zero so that word-level
/// comparisons and hashing are well defined.
class BitVector {
   public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    BitVector() = default;
    explicit BitVector(std::size_t length);

    /// Parses a string of '0'/'1' characters; bit i is character i.
    static BitVector from_string(std::string_view bits);
    static BitVector from_support(std::size_t length, std::span<const std::size_t> ones);
    static BitVector from_uint(std::size_t length, std::uint64_t value);

    std::size_t size() const { return length_; }
    std::size_t num_words() const { return words_.size(); }

    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i, bool value = true) {
        std::uint64_t mask = std::uint64_t{1} << (i & 63);
        if (value) {
            words_[i >> 6] |= mask;
        } else {
            words_[i >> 6] &= ~mask;
        }
    }
    void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }
    void clear();

    BitVector &operator^=(const BitVector &other);
    BitVector &operator&=(const BitVector &other);
    friend BitVector operator^(BitVector a, const BitVector &b) { return a ^= b; }
    friend BitVector operator&(BitVector a, const BitVector &b) { return a &= b; }

    /// Inner product over F2 (parity of the coordinatewise AND).
    bool dot(const BitVector &other) const;
    std::size_t popcount() const;
    bool none() const;
    bool any() const { return !none(); }
    std::size_t first_set() const;
    std::vector<std::size_t> support() const;

    /// Copies bits [begin, begin+count) into a new vector.
    BitVector slice(std::size_t begin, std::size_t count) const;
    /// Concatenation (this, other).
    BitVector concat(const BitVector &other) const;
    /// Low 64 bits as an integer; requires size() <= 64.
    std::uint64_t to_uint() const;

    std::span<const std::uint64_t> words() const { return words_; }
    std::span<std::uint64_t> words() { return words_; }

    std::string to_string() const;
    std::size_t hash() const;

    friend bool operator==(const BitVector &a, const BitVector &b) = default;

   private:
    std::size_t length_ = 0;
    std::vector<std::uint64_t> words_;
};

struct BitVectorHash {
    std::size_t operator()(const BitVector &v) const { return v.hash(); }
};

/// Dense matrix over F2 stored as packed rows.
class BinaryMatrix {
   public:
    BinaryMatrix() = default;
    BinaryMatrix(std::size_t rows, std::size_t cols);

    static BinaryMatrix identity(std::size_t n);
    static BinaryMatrix from_rows(std::vector<BitVector> rows, std::size_t cols);
    /// Each string is one row of '0'/'1' characters.
    static BinaryMatrix from_strings(const std::vector<std::string> &rows);
    /// Builds a matrix whose j-th column is columns[j] (all of length `rows`).
    static BinaryMatrix from_columns(std::span<const BitVector> columns, std::size_t rows);

    std::size_t rows() const { return rows_.size(); }
    std::size_t cols() const { return cols_; }

    const BitVector &row(std::size_t r) const { return rows_[r]; }
    BitVector &row(std::size_t r) { return rows_[r]; }
    const std::vector<BitVector> &row_vectors() const { return rows_; }

    bool get(std::size_t r, std::size_t c) const { return rows_[r].get(c); }
    void set(std::size_t r, std::size_t c, bool value = true) { rows_[r].set(c, value); }

    void append_row(BitVector row);
    BitVector column(std::size_t c) const;

    BinaryMatrix transposed() const;
    /// Vertical stack (this over below).
    BinaryMatrix stacked(const BinaryMatrix &below) const;
    /// Rows selected by index, in the given order.
    BinaryMatrix select_rows(std::span<const std::size_t> indices) const;

    /// Matrix product over F2.
    friend BinaryMatrix operator*(const BinaryMatrix &a, const BinaryMatrix &b);
    /// Row-vector product x·M; x has length rows().
    BitVector left_multiply(const BitVector &x) const;
    /// Column product M·yᵀ; y has length cols(). Result has length rows().
    BitVector right_multiply(const BitVector &y) const;

    bool is_zero() const;
    std::size_t popcount() const;

    friend bool operator==(const BinaryMatrix &a, const BinaryMatrix &b) = default;

   private:
    std::size_t cols_ = 0;
    std::vector<BitVector> rows_;
};

/// Pauli operator on n qubits (or circuit locations) in (u|v) form, phase dropped.
/// X = (1|0), Z = (0|1), Y = (1|1).
struct SymplecticVector {
    BitVector x;
    BitVector z;

    SymplecticVector() = default;
    explicit SymplecticVector(std::size_t n) : x(n), z(n) {}
    SymplecticVector(BitVector xs, BitVector zs);

    std::size_t n() const { return x.size(); }
    /// Flattened (u|v) vector of length 2n.
    BitVector flat() const { return x.concat(z); }
    static SymplecticVector from_flat(const BitVector &flat);

    SymplecticVector &operator^=(const SymplecticVector &o) {
        x ^= o.x;
        z ^= o.z;
        return *this;
    }
    friend bool operator==(const SymplecticVector &a, const SymplecticVector &b) = default;
};

/// a ⋆ b = u_a·v_b + v_a·u_b (mod 2). Throws std::invalid_argument on length mismatch.
bool symplectic_product(const SymplecticVector &a, const SymplecticVector &b);

std::size_t rank(const BinaryMatrix &m);

/// Reduced row echelon form with zero rows dropped.
///
/// Pivots are chosen column by column from the left; among candidate rows the
/// one with the smallest index is used. `pivots`, if given, receives the pivot
/// column of each returned row.
BinaryMatrix row_reduce(const BinaryMatrix &m, std::vector<std::size_t> *pivots = nullptr);

/// Basis K of {x : M xᵀ = 0}; K·Mᵀ = 0 and rank K = cols(M) − rank M.
BinaryMatrix kernel_basis(const BinaryMatrix &m);

/// Some x with x·M = y (rows of M as spanning set), or nullopt.
std::optional<BitVector> solve(const BinaryMatrix &m, const BitVector &y);

/// Row space of a matrix, prepared for repeated membership / solve queries.
///
/// Rows are inserted greedily in order; each stored basis vector remembers
/// which combination of original rows produced it.
class RowSpace {
   public:
    RowSpace() = default;
    explicit RowSpace(const BinaryMatrix &m);

    std::size_t rank() const { return basis_.size(); }
    std::size_t num_source_rows() const { return source_rows_; }
    std::size_t cols() const { return cols_; }

    bool contains(const BitVector &v) const;
    /// Canonical residue of v modulo the row space.
    BitVector reduce(const BitVector &v) const;
    /// Some x with x·M = v, or nullopt.
    std::optional<BitVector> solve(const BitVector &v) const;
    /// Indices of original rows that form a basis (first independent rows).
    const std::vector<std::size_t> &independent_rows() const { return independent_; }

   private:
    std::size_t cols_ = 0;
    std::size_t source_rows_ = 0;
    std::vector<BitVector> basis_;
    std::vector<std::size_t> pivot_;
    std::vector<BitVector> combo_;
    std::vector<std::size_t> independent_;
};

/// MatrixMarket coordinate pattern format, 1-based indices.
void write_matrix_market(std::ostream &out, const BinaryMatrix &m);
BinaryMatrix read_matrix_market(std::istream &in);

}  // namespace eegdec
