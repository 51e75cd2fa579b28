#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "eegdec/circuit.hpp"
#include "eegdec/gf2.hpp"
#include "eegdec/ising.hpp"
#include "eegdec/reduce.hpp"

namespace eegdec::testing {

inline constexpr const char *kRep3Round = R"(qubits 3 2
stab Z0*Z1
stab Z1*Z2
logical Z0
logical X0*X1*X2
CX d0 a0
CX d1 a1
I d2
CX d1 a0
CX d2 a1
I d0
)";

inline CliffordCircuit rep3_round() { return parse_circuit_string(kRep3Round); }

inline BitVector random_bits(std::size_t n, std::mt19937_64 &rng, double density = 0.5) {
    std::bernoulli_distribution coin(density);
    BitVector v(n);
    for (std::size_t i = 0; i < n; ++i) v.set(i, coin(rng));
    return v;
}

inline BinaryMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64 &rng, double density = 0.5) {
    BinaryMatrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) m.row(r) = random_bits(cols, rng, density);
    return m;
}

/// Random Wegner system; every bond touches at least one spin.
inline IsingSystem random_ising(std::size_t spins, std::size_t bonds, std::mt19937_64 &rng, double kmax = 2.0) {
    std::uniform_real_distribution<double> kd(-kmax, kmax);
    std::uniform_int_distribution<std::size_t> pick(0, spins - 1);
    IsingSystem s;
    s.theta = BinaryMatrix(spins, bonds);
    for (std::size_t b = 0; b < bonds; ++b) {
        BitVector col = random_bits(spins, rng, 0.3);
        if (col.none()) col.set(pick(rng));
        for (std::size_t r : col.support()) s.theta.set(r, b);
        s.K.push_back(kd(rng));
    }
    s.lineage = BinaryMatrix::identity(bonds);
    return s;
}

/// A random remaining gauge spin of weight at most `max_weight`, or npos.
inline std::size_t pick_spin(const ReducedSystem &r, std::mt19937_64 &rng, std::size_t max_weight) {
    std::vector<std::size_t> ok;
    for (std::size_t s : r.alive_gauge_rows()) {
        if (r.row_weight(s) <= max_weight) ok.push_back(s);
    }
    if (ok.empty()) return BitVector::npos;
    return ok[std::uniform_int_distribution<std::size_t>(0, ok.size() - 1)(rng)];
}

/// Σ over all 2^rows spin assignments, straight from the definition.
inline double brute_log_z(const BinaryMatrix &theta, const std::vector<double> &K, const BitVector &signs) {
    const std::size_t n = theta.rows();
    double total = 0.0;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
        double e = 0.0;
        for (std::size_t b = 0; b < K.size(); ++b) {
            int parity = signs.size() && signs.get(b);
            for (std::size_t r = 0; r < n; ++r) parity ^= ((x >> r) & 1) & theta.get(r, b);
            e += parity ? -K[b] : K[b];
        }
        total += std::exp(e);
    }
    return std::log(total);
}

/// log Σ over the spins not in `keep` of the weight of s, for the assignment
/// `fixed` of the kept spins (bit r of fixed is spin r).
inline double brute_marginal(const IsingSystem &s, const std::vector<char> &keep, std::uint64_t fixed,
                             const BitVector &e) {
    const std::size_t n = s.theta.rows();
    std::vector<std::size_t> free_spins;
    for (std::size_t r = 0; r < n; ++r) {
        if (!keep[r]) free_spins.push_back(r);
    }
    BitVector signs = s.lineage.left_multiply(e);
    double total = 0.0;
    for (std::uint64_t y = 0; y < (std::uint64_t{1} << free_spins.size()); ++y) {
        std::uint64_t x = fixed;
        for (std::size_t i = 0; i < free_spins.size(); ++i) {
            if ((y >> i) & 1) x |= std::uint64_t{1} << free_spins[i];
        }
        double w = s.log_const;
        for (std::size_t b = 0; b < s.K.size(); ++b) {
            int parity = signs.get(b);
            for (std::size_t r = 0; r < n; ++r) parity ^= ((x >> r) & 1) & s.theta.get(r, b);
            w += parity ? -s.K[b] : s.K[b];
        }
        total += std::exp(w);
    }
    return std::log(total);
}

/// log weight of a reduced system at spin assignment x (original ids).
inline double reduced_log_weight(const ReducedSystem &r, std::uint64_t x, const BitVector &e) {
    double w = r.log_const();
    for (const auto &b : r.bonds()) {
        int parity = b.lineage.dot(e);
        for (std::size_t id : b.column.support()) parity ^= (x >> id) & 1;
        w += parity ? -b.K : b.K;
    }
    return w;
}

/// Largest relative deviation between the reduced weights and the brute-force
/// marginal over all assignments of the remaining spins.
inline double marginal_deviation(const IsingSystem &s, const ReducedSystem &r, const BitVector &e) {
    const std::size_t n = s.theta.rows();
    std::vector<char> keep(n);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < n; ++i) {
        keep[i] = r.is_alive(i);
        if (keep[i]) kept.push_back(i);
    }
    double worst = 0.0;
    for (std::uint64_t y = 0; y < (std::uint64_t{1} << kept.size()); ++y) {
        std::uint64_t x = 0;
        for (std::size_t i = 0; i < kept.size(); ++i) {
            if ((y >> i) & 1) x |= std::uint64_t{1} << kept[i];
        }
        double want = brute_marginal(s, keep, x, e);
        double got = reduced_log_weight(r, x, e);
        worst = std::max(worst, std::abs(std::expm1(got - want)));
    }
    return worst;
}

}  // namespace eegdec::testing
