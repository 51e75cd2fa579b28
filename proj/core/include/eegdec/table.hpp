#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "eegdec/circuit.hpp"

namespace eegdec {

struct Dims {
    std::size_t rows = 0;
    std::size_t cols = 0;
    friend bool operator==(const Dims &, const Dims &) = default;
};

struct TableOptions {
    /// iid X/Z error probability used for the coefficients.
    double p = 0.05;
    std::vector<double> epsilons{1e-2, 1e-1};
    bool with_w4 = false;
    std::size_t final_cap = 19;
    std::size_t max_bonds = std::size_t{1} << 22;
};

/// Dimensions of the gauge block (remaining rows × columns) along the
/// canonical reduction order.
struct TableRow {
    std::size_t n0 = 0;
    std::size_t na = 0;
    std::size_t ncyc = 0;
    std::size_t d0 = 0;
    Dims orig;
    Dims w2;
    Dims w3;
    std::optional<Dims> w4;
    Dims final_dims;
    /// Smallest remaining row weight after the final stage (0 if none remain).
    std::size_t w_fin = 0;
    std::vector<std::size_t> m_eps;
    std::size_t ell1 = 0;
    /// The final stage stopped on the bond budget.
    bool incomplete = false;
};

TableRow table_row(const CliffordCircuit &c, std::size_t ncyc, std::size_t d0, const TableOptions &opt = {});

std::string table_header(const TableOptions &opt);
std::string format_row(const TableRow &row, const TableOptions &opt);

}  // namespace eegdec
