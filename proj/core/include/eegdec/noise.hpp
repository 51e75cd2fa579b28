#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "eegdec/gf2.hpp"

namespace eegdec {

enum class ModelForm { iid_xz, depolarizing, custom };

/// Pauli error distribution over N locations in Ising form:
/// prob(e) ∝ exp(Σ_b K_b (-1)^{e·θ_b}), θ_b a column over the 2N coordinates.
struct ErrorModel {
    std::size_t N = 0;
    std::vector<BitVector> columns;  // θ columns, length 2N each
    std::vector<double> K;
    ModelForm form = ModelForm::custom;
    std::string descriptor;

    std::size_t bonds() const { return K.size(); }
    /// θ as a 2N × m matrix.
    BinaryMatrix theta() const;
    /// Energy Σ_b K_b (-1)^{e·θ_b}.
    double energy(const BitVector &e) const;
};

/// Half-LLR K = ln((1-p)/p)/2.
double half_llr(double p);

ErrorModel iid_xz(std::size_t N, double pX, double pZ);
ErrorModel iid_xz(const std::vector<double> &pX, const std::vector<double> &pZ);
/// Three columns per location (X, Z, X+Z), each with K = ln(3(1-p)/p)/4.
ErrorModel depolarizing(std::size_t N, double p);
ErrorModel depolarizing(const std::vector<double> &p);
/// Adds one column supported on the given coordinates.
ErrorModel add_correlation(const ErrorModel &model, const std::vector<std::size_t> &support, double K);

/// Per-location outcome probabilities indexed by u + 2v: I, X, Z, Y.
using LocationDistribution = std::array<double, 4>;

/// True when every column is supported on the two coordinates of a single
/// location.
bool is_product_form(const ErrorModel &model);
/// Exact single-location distributions; requires product form.
std::vector<LocationDistribution> location_distributions(const ErrorModel &model);

/// Independent per-location sampler for product-form models.
class ErrorSampler {
   public:
    explicit ErrorSampler(const ErrorModel &model);
    BitVector sample(std::mt19937_64 &rng) const;
    std::size_t N() const { return N_; }

   private:
    std::size_t N_ = 0;
    std::vector<std::array<double, 3>> cumulative_;  // P(I), P(I)+P(X), P(I)+P(X)+P(Z)
};

BitVector sample_error(const ErrorModel &model, std::mt19937_64 &rng);

/// Model file: `K <value> <loc>:<X|Z>[,<loc>:<X|Z>...]` per line, 1-based locations.
ErrorModel read_model_file(std::istream &in, std::size_t N);
void write_model_file(std::ostream &out, const ErrorModel &model);

/// `iid:<p>`, `depol:<p>` or `file:<path>`.
ErrorModel parse_model_spec(std::string_view spec, std::size_t N);

}  // namespace eegdec
