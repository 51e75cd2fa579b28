#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "eegdec/gf2.hpp"
#include "eegdec/noise.hpp"

namespace eegdec {

struct EEGMatrices;

/// Wegner-form Ising system: weight(s) = exp(logC + Σ_b K_b Π_{r: Θ_rb=1} s_r).
/// `lineage` (coordinates × bonds) gives the sign functional of each bond:
/// an error e flips K_b when e·lineage_b = 1.
struct IsingSystem {
    BinaryMatrix theta;
    std::vector<double> K;
    double log_const = 0.0;
    BinaryMatrix lineage;

    std::size_t spins() const { return theta.rows(); }
    std::size_t bonds() const { return K.size(); }
    /// Sign pattern (one bit per bond) induced by an error vector.
    BitVector signs_for(const BitVector &e) const;
};

/// Joint distribution of m binary variables, p[x] with bit i of x = variable i.
struct BernoulliTable {
    std::size_t m = 0;
    std::vector<double> p;
};

IsingSystem bernoulli_to_ising(const BernoulliTable &t);

/// logC + Σ_b K_b (-1)^{x·Θ_b} for a spin assignment x (bit r = 1 means s_r = -1).
double log_weight(const IsingSystem &s, const BitVector &x);

class CapExceeded : public std::runtime_error {
   public:
    CapExceeded(std::size_t rows, std::size_t cap);
    std::size_t rows() const { return rows_; }
    std::size_t cap() const { return cap_; }

   private:
    std::size_t rows_;
    std::size_t cap_;
};

struct EnumerationOptions {
    std::size_t max_spins = 26;
    /// 0 selects default_workers().
    std::size_t workers = 0;
};

/// EEGDEC_WORKERS if set, otherwise the hardware concurrency.
std::size_t default_workers();

/// log Σ_{s} exp(Σ_b (-1)^{signs_b} K_b R_b(s)) for every sign pattern, in
/// one pass over the 2^rows spin configurations. log_const is not included.
std::vector<double> log_partition_functions(const BinaryMatrix &theta, std::span<const double> K,
                                            std::span<const BitVector> signs, const EnumerationOptions &opt = {});

double log_partition_function(const BinaryMatrix &theta, std::span<const double> K, const BitVector &signs,
                              const EnumerationOptions &opt = {});

/// Including the system's log_const.
double partition_function(const IsingSystem &s, const BitVector &signs, const EnumerationOptions &opt = {});

/// log Σ_e exp(Σ_b K_b (-1)^{e·θ_b}); factorizes over connected groups of
/// coordinates, each enumerated exactly.
double log_normalizer(const ErrorModel &model, const EnumerationOptions &opt = {});
double log_prob_of_error(const ErrorModel &model, const BitVector &e, double log_norm);
double prob_of_error(const ErrorModel &model, const BitVector &e);

/// Ising system with spins = rows of `rows` (over 2N coordinates) and the
/// model's bonds: Θ = rows · θ, lineage = θ.
IsingSystem coupled_system(const BinaryMatrix &rows, const ErrorModel &model);

/// log of Σ_{g in rowspace G} exp(energy(e + g)); unnormalized.
double class_log_weight(const BinaryMatrix &G, const ErrorModel &model, const BitVector &e,
                        const EnumerationOptions &opt = {});
/// Normalized log-probability of the class of e.
double class_probability(const BinaryMatrix &G, const ErrorModel &model, const BitVector &e,
                         const EnumerationOptions &opt = {});
double class_probability(const EEGMatrices &m, const ErrorModel &model, const BitVector &e,
                         const EnumerationOptions &opt = {});

}  // namespace eegdec
