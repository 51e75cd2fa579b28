#include "eegdec/eeg.hpp"

namespace eegdec {

namespace {

// Image of Pauli `pauli` (0 = X, 1 = Z) entering `gate` on its operand
// `side` (0 = q0, 1 = q1), written into `row` at the outgoing locations.
void push_through(const Gate &gate, const LocationTable &loc, const std::array<std::size_t, 2> &seg, int side,
                  int pauli, BitVector &row) {
    const std::size_t N = loc.N;
    auto out = [&](int s) {
        std::size_t w = s == 0 ? gate.q0 : gate.q1;
        return loc.id(w, seg[s] + 1);
    };
    auto put_x = [&](int s) { row.flip(x_coord(out(s))); };
    auto put_z = [&](int s) { row.flip(z_coord(N, out(s))); };
    switch (gate.kind) {
        case GateKind::I:
            pauli == 0 ? put_x(0) : put_z(0);
            break;
        case GateKind::H:
            pauli == 0 ? put_z(0) : put_x(0);
            break;
        case GateKind::P:
            put_z(0);
            if (pauli == 0) put_x(0);
            break;
        case GateKind::CNOT:
            if (side == 0 && pauli == 0) {
                put_x(0);
                put_x(1);
            } else if (side == 0) {
                put_z(0);
            } else if (pauli == 0) {
                put_x(1);
            } else {
                put_z(0);
                put_z(1);
            }
            break;
    }
}

struct GateRef {
    std::size_t gate;
    int side;
};

// For each location, the gate it enters (terminal locations map to none).
std::vector<GateRef> following_gate(const CliffordCircuit &c, const LocationTable &loc) {
    std::vector<GateRef> next(loc.N, GateRef{Gate::none, 0});
    for (std::size_t g = 0; g < c.gates.size(); ++g) {
        const auto &gate = c.gates[g];
        const auto &seg = loc.gate_segment[g];
        next[loc.id(gate.q0, seg[0])] = {g, 0};
        if (gate.kind == GateKind::CNOT) next[loc.id(gate.q1, seg[1])] = {g, 1};
    }
    return next;
}

BitVector generator_row(const CliffordCircuit &c, const LocationTable &loc, std::size_t location, GateRef ref,
                        int pauli) {
    BitVector row(2 * loc.N);
    row.set(pauli == 0 ? x_coord(location) : z_coord(loc.N, location));
    push_through(c.gates[ref.gate], loc, loc.gate_segment[ref.gate], ref.side, pauli, row);
    return row;
}

}  // namespace

ValidationError::ValidationError(std::string identity, const std::string &detail)
    : std::runtime_error(identity + ": " + detail), identity_(std::move(identity)) {}

BinaryMatrix build_generators(const CliffordCircuit &c, const LocationTable &loc) {
    auto next = following_gate(c, loc);
    BinaryMatrix G;
    for (std::size_t i = 0; i < loc.N; ++i) {
        if (next[i].gate == Gate::none) continue;
        G.append_row(generator_row(c, loc, i, next[i], 0));
        G.append_row(generator_row(c, loc, i, next[i], 1));
    }
    for (std::size_t j = 0; j < loc.na; ++j) {
        BitVector init(2 * loc.N), meas(2 * loc.N);
        init.set(z_coord(loc.N, loc.ancilla_init(j)));
        meas.set(z_coord(loc.N, loc.ancilla_measure(j)));
        G.append_row(std::move(init));
        G.append_row(std::move(meas));
    }
    if (G.rows() == 0) G = BinaryMatrix(0, 2 * loc.N);
    return G;
}

BitVector embed_input(const EEGMatrices &m, const SymplecticVector &p) {
    const auto &loc = m.locations;
    BitVector out(2 * loc.N);
    for (std::size_t q : p.x.support()) out.set(x_coord(loc.input(q)));
    for (std::size_t q : p.z.support()) out.set(z_coord(loc.N, loc.input(q)));
    return out;
}

BinaryMatrix build_logicals(const CliffordCircuit &c, const LocationTable &loc, const BinaryMatrix &G) {
    if (c.logicals.size() % 2 != 0) {
        throw ValidationError("logical metadata", "expected an even number (2k) of logical operators");
    }
    BinaryMatrix L(0, 2 * loc.N);
    for (const auto &p : c.logicals) {
        BitVector row(2 * loc.N);
        for (std::size_t q : p.x.support()) row.set(x_coord(loc.input(q)));
        for (std::size_t q : p.z.support()) row.set(z_coord(loc.N, loc.input(q)));
        L.append_row(std::move(row));
    }
    if (rank(G.stacked(L)) != rank(G) + L.rows()) {
        throw ValidationError("logical independence", "a combination of logical rows lies in the row space of G");
    }
    return L;
}

BinaryMatrix build_parity(const BinaryMatrix &G, const BinaryMatrix &L) { return kernel_basis(G.stacked(L)); }

OutputError propagate_to_output(const EEGMatrices &m, const BitVector &e) {
    const auto &loc = m.locations;
    const auto &c = m.circuit;
    if (e.size() != 2 * loc.N) throw std::invalid_argument("propagate_to_output: expected length 2N");
    BitVector v = e;
    for (std::size_t g = 0; g < c.gates.size(); ++g) {
        const auto &gate = c.gates[g];
        const auto &seg = loc.gate_segment[g];
        for (int side = 0; side < static_cast<int>(gate.arity()); ++side) {
            std::size_t w = side == 0 ? gate.q0 : gate.q1;
            std::size_t at = loc.id(w, seg[side]);
            for (int pauli = 0; pauli < 2; ++pauli) {
                std::size_t coord = pauli == 0 ? x_coord(at) : z_coord(loc.N, at);
                if (!v.get(coord)) continue;
                v.flip(coord);
                push_through(gate, loc, seg, side, pauli, v);
            }
        }
    }
    OutputError out{SymplecticVector(loc.n0), BitVector(loc.na)};
    for (std::size_t q = 0; q < loc.n0; ++q) {
        if (v.get(x_coord(loc.output(q)))) out.e0.x.set(q);
        if (v.get(z_coord(loc.N, loc.output(q)))) out.e0.z.set(q);
    }
    for (std::size_t j = 0; j < loc.na; ++j) {
        if (v.get(x_coord(loc.ancilla_measure(j)))) out.sigma.set(j);
    }
    return out;
}

BitVector embed_output(const EEGMatrices &m, const SymplecticVector &e0, const BitVector &sigma) {
    const auto &loc = m.locations;
    if (e0.n() != loc.n0 || sigma.size() != loc.na) throw std::invalid_argument("embed_output: size mismatch");
    BitVector out(2 * loc.N);
    for (std::size_t q : e0.x.support()) out.set(x_coord(loc.output(q)));
    for (std::size_t q : e0.z.support()) out.set(z_coord(loc.N, loc.output(q)));
    for (std::size_t j : sigma.support()) out.set(x_coord(loc.ancilla_measure(j)));
    return out;
}

BitVector representative_mask(const EEGMatrices &m) {
    const auto &loc = m.locations;
    BitVector mask(2 * loc.N);
    for (std::size_t q = 0; q < loc.n0; ++q) {
        mask.set(x_coord(loc.output(q)));
        mask.set(z_coord(loc.N, loc.output(q)));
    }
    for (std::size_t j = 0; j < loc.na; ++j) mask.set(x_coord(loc.ancilla_measure(j)));
    return mask;
}

SymplecticVector canonical_base(const EEGMatrices &m, const SymplecticVector &e0) {
    return SymplecticVector::from_flat(m.output.span.reduce(e0.flat()));
}

BitVector class_of(const EEGMatrices &m, const BitVector &e) {
    OutputError out = propagate_to_output(m, e);
    BitVector flat = out.e0.flat();
    BitVector shifted = flat ^ m.output.span.reduce(flat);
    auto x = m.output.span.solve(shifted);
    if (!x) throw std::logic_error("class_of: output frame is inconsistent");
    return x->slice(m.output.stabilizers.rows(), m.output.logicals.rows());
}

EEGMatrices build_eeg(const CliffordCircuit &input) {
    EEGMatrices m;
    m.circuit = pad_odd_locations(input);
    m.locations = enumerate_locations(m.circuit);
    const auto &loc = m.locations;
    m.G = build_generators(m.circuit, loc);
    m.L = build_logicals(m.circuit, loc, m.G);
    m.H = build_parity(m.G, m.L);

    // Output images of the generators and logicals; each row propagates in
    // isolation so that the frame does not depend on row order.
    m.output.stabilizers = BinaryMatrix(0, 2 * loc.n0);
    m.output.logicals = BinaryMatrix(0, 2 * loc.n0);
    for (const auto &row : m.G.row_vectors()) {
        OutputError o = propagate_to_output(m, row);
        if (o.sigma.any()) throw ValidationError("trivial generators", "a generator flips a measurement outcome");
        BitVector flat = o.e0.flat();
        if (flat.any()) m.output.stabilizers.append_row(std::move(flat));
    }
    for (const auto &row : m.L.row_vectors()) {
        OutputError o = propagate_to_output(m, row);
        if (o.sigma.any()) throw ValidationError("logical commutation", "a logical operator flips a measurement outcome");
        m.output.logicals.append_row(o.e0.flat());
    }
    m.output.span = RowSpace(m.output.stabilizers.stacked(m.output.logicals));
    if (m.output.span.rank() != rank(m.output.stabilizers) + m.L.rows()) {
        throw ValidationError("output logicals", "output logical images are not independent of output stabilizers");
    }
    m.params = validate_ranks(m);
    return m;
}

CircuitParams validate_ranks(const EEGMatrices &m) {
    const auto &loc = m.locations;
    CircuitParams p;
    p.N = loc.N;
    p.n0 = loc.n0;
    p.na = loc.na;
    p.k = m.L.rows() / 2;
    const std::size_t twoN = 2 * p.N;
    if (m.G.cols() != twoN || m.L.cols() != twoN || m.H.cols() != twoN) {
        throw ValidationError("dimensions", "G, L and H must all have 2N columns");
    }
    std::size_t expected_rows = twoN - 2 * (p.n0 + p.na) + 2 * p.na;
    if (m.G.rows() != expected_rows) {
        throw ValidationError("generator count", "expected " + std::to_string(expected_rows) + " rows in G, found " +
                                                     std::to_string(m.G.rows()));
    }

    BinaryMatrix stab(0, 2 * p.n0);
    for (const auto &s : m.circuit.stabilizers) stab.append_row(s.flat());
    p.r0 = rank(stab);

    RowSpace gspace(m.G);
    p.rank_g = gspace.rank();
    for (const auto &s : m.circuit.stabilizers) {
        if (!gspace.contains(embed_input(m, s))) {
            throw ValidationError("input stabilizers in EEG", "input stabilizer " + format_pauli(s) +
                                                                  " is not in the row space of G");
        }
    }
    if (twoN < 2 * p.n0 + p.rank_g) {
        throw ValidationError("rank G = 2N - 2n0 - f", "rank G exceeds 2N - 2n0");
    }
    p.f = twoN - 2 * p.n0 - p.rank_g;
    if (p.na < p.r0 + p.f) {
        throw ValidationError("f = na - kappa - r0", "inferred gauge count kappa would be negative");
    }
    p.kappa = p.na - p.r0 - p.f;

    std::size_t rank_l = rank(m.L);
    if (rank_l != m.L.rows()) throw ValidationError("rank L = 2k", "logical rows are dependent");
    if (rank(m.G.stacked(m.L)) != p.rank_g + rank_l) {
        throw ValidationError("logical independence", "L intersects the row space of G");
    }
    if (!(m.H * m.G.transposed()).is_zero()) throw ValidationError("H G^T = 0", "parity rows not orthogonal to G");
    if (m.L.rows() && !(m.H * m.L.transposed()).is_zero()) {
        throw ValidationError("H L^T = 0", "parity rows not orthogonal to L");
    }
    p.rank_h = rank(m.H);
    if (p.rank_h != twoN - p.rank_g - rank_l) {
        throw ValidationError("rank H = 2N - rank G - rank L",
                              "rank H = " + std::to_string(p.rank_h) + ", expected " +
                                  std::to_string(twoN - p.rank_g - rank_l));
    }
    if (p.rank_h != p.na - p.kappa + p.r0) {
        throw ValidationError("rank H = na - kappa + r0", "rank H = " + std::to_string(p.rank_h) + ", expected " +
                                                               std::to_string(p.na - p.kappa + p.r0));
    }
    return p;
}

}  // namespace eegdec
