#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eegdec/eeg.hpp"
#include "eegdec/gf2.hpp"
#include "eegdec/ising.hpp"
#include "eegdec/noise.hpp"
#include "eegdec/reduce.hpp"

namespace eegdec {

enum class DecodeMethod { ml_full, ml_reduced, me, oracle };
std::string_view to_string(DecodeMethod m);

/// Values within this distance of the maximum count as ties; the lowest
/// alpha wins.
inline constexpr double kTieTolerance = 1e-9;

struct DecodeResult {
    BitVector alpha;  // bit j <-> row j of L
    /// Normalized log-probability of each class, indexed by alpha read as
    /// an unsigned integer.
    std::vector<double> log_probs;
    DecodeMethod method = DecodeMethod::ml_full;

    std::uint64_t chosen() const { return alpha.to_uint(); }
};

DecodeResult pick_class(std::vector<double> log_probs, std::size_t logical_rows, DecodeMethod method);

/// e_alpha = embed_output(base, sigma) + alpha L for every alpha.
std::vector<BitVector> class_hypotheses(const EEGMatrices &m, const BitVector &sigma, const SymplecticVector &base);

/// Partition functions over a basis of G.
DecodeResult ml_decode(const EEGMatrices &m, const ErrorModel &model, const BitVector &sigma,
                       const SymplecticVector &base, const EnumerationOptions &opt = {});
DecodeResult ml_decode(const EEGMatrices &m, const ErrorModel &model, const BitVector &sigma,
                       const EnumerationOptions &opt = {});

/// Enumerates the remaining gauge spins of `r`. `log_norm` is the model
/// normalizer (log_normalizer(model)).
DecodeResult ml_decode(const ReducedSystem &r, const EEGMatrices &m, const BitVector &sigma,
                       const SymplecticVector &base, double log_norm, const EnumerationOptions &opt = {});

/// Energy comparison on a fully reduced system.
DecodeResult me_decode(const ReducedSystem &r, const EEGMatrices &m, const BitVector &sigma,
                       const SymplecticVector &base, double log_norm);

/// Exact distribution of (alpha, sigma, output base) for a product-form
/// model: per-location outcome distributions XOR-convolved over the image
/// of the class map. Does not use G or the Ising machinery.
class ClassOracle {
   public:
    ClassOracle(const EEGMatrices &m, const ErrorModel &model, std::size_t max_dim = 24);

    /// Normalized log-probability of the class of e.
    double log_prob(const BitVector &e) const;
    DecodeResult decode(const BitVector &sigma, const SymplecticVector &base) const;
    std::size_t dimension() const { return basis_.rank(); }
    /// Log-probabilities of all 2^dimension() classes (coordinates in the
    /// image basis).
    const std::vector<double> &table() const { return log_p_; }

   private:
    BitVector key(const BitVector &e) const;
    std::uint64_t coordinates(const BitVector &key) const;

    const EEGMatrices *m_;
    RowSpace basis_;
    std::vector<double> log_p_;
};

DecodeResult exhaustive_oracle(const EEGMatrices &m, const ErrorModel &model, const BitVector &sigma,
                               const SymplecticVector &base = {});

enum class Reduction { none, w2, w3, full, complete };
std::string_view to_string(Reduction r);
std::optional<Reduction> parse_reduction(std::string_view s);

enum class DecoderKind { ml, me, oracle };
std::string_view to_string(DecoderKind k);
std::optional<DecoderKind> parse_decoder(std::string_view s);

struct DecoderSpec {
    DecoderKind kind = DecoderKind::ml;
    Reduction reduction = Reduction::full;
    /// Weight cap of the final reduction stage.
    std::size_t final_cap = 19;
    EnumerationOptions enumeration;
};

/// Prepared decoder; reduction (if any) happens once in the constructor.
class Decoder {
   public:
    Decoder(const EEGMatrices &m, const ErrorModel &model, const DecoderSpec &spec);

    DecodeResult decode(const BitVector &sigma, const SymplecticVector &base) const;
    DecodeResult decode(const BitVector &sigma) const;
    const ReducedSystem *reduced() const { return reduced_ ? &*reduced_ : nullptr; }
    const DecoderSpec &spec() const { return spec_; }

   private:
    const EEGMatrices *m_;
    const ErrorModel *model_;
    DecoderSpec spec_;
    double log_norm_ = 0.0;
    std::optional<ReducedSystem> reduced_;
    std::shared_ptr<ClassOracle> oracle_;
};

/// Applies the w2 / w3 / final stages of the canonical reduction order;
/// `complete` continues past the final stage with eliminate_spin.
ReducedSystem reduce_circuit(const EEGMatrices &m, const ErrorModel &model, Reduction r, std::size_t final_cap = 19,
                             const ReduceOptions &opt = {});

struct SimReport {
    std::size_t trials = 0;
    std::size_t failures = 0;
    std::uint64_t seed = 0;
    std::string decoder;
    std::string reduction;
    std::string model;
    double seconds = 0.0;
    /// Decisions per trial (only filled when requested).
    std::vector<std::uint64_t> decisions;

    double failure_rate() const;
};

/// Samples errors, decodes the syndrome with the perfect-round output base,
/// and counts class mismatches. Trials are split into fixed chunks seeded
/// from `seed`, so the report does not depend on the worker count.
SimReport monte_carlo(const EEGMatrices &m, const ErrorModel &model, const Decoder &decoder, std::size_t trials,
                      std::uint64_t seed, bool keep_decisions = false, std::size_t workers = 0);

}  // namespace eegdec
