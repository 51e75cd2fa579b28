#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eegdec/gf2.hpp"

namespace eegdec {

enum class GateKind { H, P, CNOT, I };

struct Gate {
    static constexpr std::size_t none = static_cast<std::size_t>(-1);

    GateKind kind = GateKind::I;
    std::size_t q0 = 0;     // control for CNOT
    std::size_t q1 = none;  // target for CNOT

    std::size_t arity() const { return kind == GateKind::CNOT ? 2 : 1; }
    friend bool operator==(const Gate &, const Gate &) = default;
};

/// Measurement circuit in the Fig. 1 model: wires [0, n0) carry data, wires
/// [n0, n0+na) are ancillas prepared in |0> before their first gate and
/// measured in Z after their last one.
struct CliffordCircuit {
    std::size_t n0 = 0;
    std::size_t na = 0;
    std::vector<Gate> gates;
    /// Input-code metadata, Pauli operators on the n0 data qubits.
    std::vector<SymplecticVector> stabilizers;
    std::vector<SymplecticVector> logicals;

    std::size_t wires() const { return n0 + na; }
    bool is_ancilla(std::size_t wire) const { return wire >= n0; }
    std::vector<std::size_t> gates_per_wire() const;

    friend bool operator==(const CliffordCircuit &, const CliffordCircuit &) = default;
};

class ParseError : public std::runtime_error {
   public:
    ParseError(std::size_t line, const std::string &what);
    std::size_t line() const { return line_; }

   private:
    std::size_t line_;
};

CliffordCircuit parse_circuit(std::istream &in);
CliffordCircuit parse_circuit_string(std::string_view text);
std::string serialize_circuit(const CliffordCircuit &c);

/// Pauli string such as "Z0*Z1" or "X0*Y2" over n qubits.
SymplecticVector parse_pauli(std::string_view text, std::size_t n);
std::string format_pauli(const SymplecticVector &p);

/// Appends an identity gate to every wire with an even location count.
CliffordCircuit pad_odd_locations(const CliffordCircuit &c);

/// Numbering of the N error locations: wire-major (data wires, then
/// ancillas), time order within each wire. Ids are 0-based here; files
/// and user-facing text use 1-based ids.
struct LocationTable {
    std::size_t n0 = 0;
    std::size_t na = 0;
    std::size_t N = 0;
    std::vector<std::size_t> offset;  // per wire
    std::vector<std::size_t> count;   // per wire, gates + 1
    /// For each gate, the segment index (on q0, q1) of the location entering it.
    std::vector<std::array<std::size_t, 2>> gate_segment;

    std::size_t id(std::size_t wire, std::size_t segment) const { return offset[wire] + segment; }
    std::size_t wire_of(std::size_t location) const;
    std::size_t input(std::size_t data) const { return id(data, 0); }
    std::size_t output(std::size_t data) const { return id(data, count[data] - 1); }
    std::size_t ancilla_init(std::size_t j) const { return id(n0 + j, 0); }
    std::size_t ancilla_measure(std::size_t j) const { return id(n0 + j, count[n0 + j] - 1); }
    bool is_terminal(std::size_t location) const;
};

/// Requires every wire to have an odd location count (see pad_odd_locations).
LocationTable enumerate_locations(const CliffordCircuit &c);

/// Repetition-code circuit: for every cycle and i, ancilla c*n0+i collects
/// CNOTs from data i and data (i+1) mod n0. One idle step separates cycles.
CliffordCircuit gen_repetition(std::size_t n0, std::size_t ncyc);

/// Rotated toric code [[t^2+(t+1)^2, 1, 2t+1]] with generators
/// Z_i X_{i+t} X_{i+t+1} Z_{i+2t+1}, measured in four CNOT layers per cycle.
CliffordCircuit gen_rotated_toric(std::size_t t, std::size_t ncyc);

}  // namespace eegdec
