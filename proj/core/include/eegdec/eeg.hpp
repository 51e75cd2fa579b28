#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "eegdec/circuit.hpp"
#include "eegdec/gf2.hpp"

namespace eegdec {

/// Columns of all 2N-wide matrices: [0, N) are X parts of locations,
/// [N, 2N) are Z parts.
inline std::size_t x_coord(std::size_t location) { return location; }
inline std::size_t z_coord(std::size_t N, std::size_t location) { return N + location; }

struct CircuitParams {
    std::size_t N = 0;
    std::size_t n0 = 0;
    std::size_t na = 0;
    std::size_t k = 0;
    std::size_t r0 = 0;
    std::size_t kappa = 0;
    std::size_t f = 0;
    std::size_t rank_g = 0;
    std::size_t rank_h = 0;

    std::size_t ell1() const { return 2 * n0 + f; }
};

/// Output-side description of a circuit: every error is equivalent to one
/// supported on the output data and the ancilla X just before measurement.
struct OutputFrame {
    /// Output images of G rows, data part only (2n0 columns); spans the
    /// output stabilizer group.
    BinaryMatrix stabilizers;
    /// Output images of the L rows, data part.
    BinaryMatrix logicals;
    /// Row space of (stabilizers; logicals).
    RowSpace span;
};

struct EEGMatrices {
    CliffordCircuit circuit;
    LocationTable locations;
    BinaryMatrix G;
    BinaryMatrix L;
    BinaryMatrix H;
    CircuitParams params;
    OutputFrame output;
};

struct OutputError {
    SymplecticVector e0;  // on the n0 output data qubits
    BitVector sigma;      // na syndrome bits

    friend bool operator==(const OutputError &, const OutputError &) = default;
};

class ValidationError : public std::runtime_error {
   public:
    ValidationError(std::string identity, const std::string &detail);
    const std::string &identity() const { return identity_; }

   private:
    std::string identity_;
};

/// Rows: for every non-terminal location (in location order) the X and then
/// the Z generator across the following gate; then Z after initialization
/// and Z before measurement for every ancilla.
BinaryMatrix build_generators(const CliffordCircuit &c, const LocationTable &loc);

/// Logical metadata embedded at the input layer. Throws if metadata is
/// missing or a nonzero combination of rows lies in the row space of G.
BinaryMatrix build_logicals(const CliffordCircuit &c, const LocationTable &loc, const BinaryMatrix &G);

BinaryMatrix build_parity(const BinaryMatrix &G, const BinaryMatrix &L);

/// Pads, numbers locations, builds G, L, H and the output frame, and runs
/// validate_ranks.
EEGMatrices build_eeg(const CliffordCircuit &c);

/// Checks the rank identities and orthogonality relations; throws
/// ValidationError naming the first violated identity.
CircuitParams validate_ranks(const EEGMatrices &m);

/// Embeds a data-qubit Pauli at the input layer.
BitVector embed_input(const EEGMatrices &m, const SymplecticVector &p);

OutputError propagate_to_output(const EEGMatrices &m, const BitVector &e);
BitVector embed_output(const EEGMatrices &m, const SymplecticVector &e0, const BitVector &sigma);

/// Representative of the output data error modulo output stabilizers and
/// logicals; fixed by a perfect final syndrome measurement.
SymplecticVector canonical_base(const EEGMatrices &m, const SymplecticVector &e0);

/// Logical class alpha (bit j <-> row j of L) of a circuit error.
BitVector class_of(const EEGMatrices &m, const BitVector &e);

/// Mask over the 2N coordinates touched by embed_output: output data X/Z
/// and ancilla X before measurement.
BitVector representative_mask(const EEGMatrices &m);

}  // namespace eegdec
