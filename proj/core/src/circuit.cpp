#include "eegdec/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <istream>
#include <sstream>

namespace eegdec {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

bool parse_count(std::string_view s, std::size_t &out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

const char *gate_name(GateKind k) {
    switch (k) {
        case GateKind::H:
            return "H";
        case GateKind::P:
            return "P";
        case GateKind::CNOT:
            return "CX";
        case GateKind::I:
            return "I";
    }
    return "?";
}

std::string wire_name(const CliffordCircuit &c, std::size_t w) {
    return c.is_ancilla(w) ? "a" + std::to_string(w - c.n0) : "d" + std::to_string(w);
}

}  // namespace

std::vector<std::size_t> CliffordCircuit::gates_per_wire() const {
    std::vector<std::size_t> g(wires(), 0);
    for (const auto &gate : gates) {
        ++g[gate.q0];
        if (gate.kind == GateKind::CNOT) ++g[gate.q1];
    }
    return g;
}

ParseError::ParseError(std::size_t line, const std::string &what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

SymplecticVector parse_pauli(std::string_view text, std::size_t n) {
    SymplecticVector p(n);
    text = trim(text);
    if (text.empty()) throw std::invalid_argument("empty Pauli string");
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('*', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view factor = trim(text.substr(start, end - start));
        if (factor.size() < 2) throw std::invalid_argument("bad Pauli factor '" + std::string(factor) + "'");
        std::size_t q = 0;
        if (!parse_count(factor.substr(1), q)) {
            throw std::invalid_argument("bad qubit index in '" + std::string(factor) + "'");
        }
        if (q >= n) throw std::invalid_argument("qubit index " + std::to_string(q) + " out of range");
        switch (factor[0]) {
            case 'X':
                p.x.flip(q);
                break;
            case 'Z':
                p.z.flip(q);
                break;
            case 'Y':
                p.x.flip(q);
                p.z.flip(q);
                break;
            case 'I':
                break;
            default:
                throw std::invalid_argument("unknown Pauli '" + std::string(1, factor[0]) + "'");
        }
        start = end + 1;
    }
    return p;
}

std::string format_pauli(const SymplecticVector &p) {
    std::string out;
    for (std::size_t q = 0; q < p.n(); ++q) {
        bool x = p.x.get(q), z = p.z.get(q);
        if (!x && !z) continue;
        if (!out.empty()) out += '*';
        out += x && z ? 'Y' : (x ? 'X' : 'Z');
        out += std::to_string(q);
    }
    return out.empty() ? "I0" : out;
}

CliffordCircuit parse_circuit(std::istream &in) {
    CliffordCircuit c;
    bool have_header = false;
    std::string raw;
    std::size_t lineno = 0;
    auto parse_wire = [&](std::string_view tok) -> std::size_t {
        std::size_t idx = 0;
        if (tok.size() < 2 || (tok[0] != 'd' && tok[0] != 'a') || !parse_count(tok.substr(1), idx)) {
            throw ParseError(lineno, "bad wire '" + std::string(tok) + "'");
        }
        std::size_t limit = tok[0] == 'd' ? c.n0 : c.na;
        if (idx >= limit) throw ParseError(lineno, "wire '" + std::string(tok) + "' out of range");
        return tok[0] == 'd' ? idx : c.n0 + idx;
    };
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto tok = split_ws(line);
        if (tok.empty()) continue;
        if (tok[0] == "qubits") {
            if (have_header) throw ParseError(lineno, "duplicate qubits line");
            if (tok.size() != 3 || !parse_count(tok[1], c.n0) || !parse_count(tok[2], c.na)) {
                throw ParseError(lineno, "expected 'qubits <n0> <na>'");
            }
            have_header = true;
            continue;
        }
        if (!have_header) throw ParseError(lineno, "'qubits <n0> <na>' must come first");
        if (tok[0] == "stab" || tok[0] == "logical") {
            if (tok.size() < 2) throw ParseError(lineno, "missing Pauli string");
            std::string joined;
            for (std::size_t i = 1; i < tok.size(); ++i) joined += tok[i];
            SymplecticVector p;
            try {
                p = parse_pauli(joined, c.n0);
            } catch (const std::exception &e) {
                throw ParseError(lineno, e.what());
            }
            (tok[0] == "stab" ? c.stabilizers : c.logicals).push_back(std::move(p));
            continue;
        }
        Gate g;
        if (tok[0] == "H" || tok[0] == "P" || tok[0] == "I") {
            if (tok.size() != 2) throw ParseError(lineno, "single-qubit gate takes one wire");
            g.kind = tok[0] == "H" ? GateKind::H : (tok[0] == "P" ? GateKind::P : GateKind::I);
            g.q0 = parse_wire(tok[1]);
        } else if (tok[0] == "CX" || tok[0] == "CNOT") {
            if (tok.size() != 3) throw ParseError(lineno, "CX takes control and target wires");
            g.kind = GateKind::CNOT;
            g.q0 = parse_wire(tok[1]);
            g.q1 = parse_wire(tok[2]);
            if (g.q0 == g.q1) throw ParseError(lineno, "CX with repeated qubit");
        } else {
            throw ParseError(lineno, "unknown directive '" + std::string(tok[0]) + "'");
        }
        c.gates.push_back(g);
    }
    if (!have_header) throw ParseError(lineno, "missing 'qubits <n0> <na>' line");
    return c;
}

CliffordCircuit parse_circuit_string(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_circuit(in);
}

std::string serialize_circuit(const CliffordCircuit &c) {
    std::ostringstream out;
    out << "qubits " << c.n0 << ' ' << c.na << '\n';
    for (const auto &s : c.stabilizers) out << "stab " << format_pauli(s) << '\n';
    for (const auto &l : c.logicals) out << "logical " << format_pauli(l) << '\n';
    for (const auto &g : c.gates) {
        out << gate_name(g.kind) << ' ' << wire_name(c, g.q0);
        if (g.kind == GateKind::CNOT) out << ' ' << wire_name(c, g.q1);
        out << '\n';
    }
    return out.str();
}

CliffordCircuit pad_odd_locations(const CliffordCircuit &c) {
    CliffordCircuit out = c;
    auto g = c.gates_per_wire();
    for (std::size_t w = 0; w < c.wires(); ++w) {
        if ((g[w] + 1) % 2 == 0) out.gates.push_back({GateKind::I, w, Gate::none});
    }
    return out;
}

std::size_t LocationTable::wire_of(std::size_t location) const {
    auto it = std::upper_bound(offset.begin(), offset.end(), location);
    return static_cast<std::size_t>(it - offset.begin()) - 1;
}

bool LocationTable::is_terminal(std::size_t location) const {
    std::size_t w = wire_of(location);
    return location == offset[w] + count[w] - 1;
}

LocationTable enumerate_locations(const CliffordCircuit &c) {
    LocationTable t;
    t.n0 = c.n0;
    t.na = c.na;
    auto g = c.gates_per_wire();
    t.offset.resize(c.wires());
    t.count.resize(c.wires());
    std::size_t next = 0;
    for (std::size_t w = 0; w < c.wires(); ++w) {
        t.count[w] = g[w] + 1;
        if (t.count[w] % 2 == 0) {
            throw std::invalid_argument("wire " + std::to_string(w) + " has an even location count; pad first");
        }
        t.offset[w] = next;
        next += t.count[w];
    }
    t.N = next;
    std::vector<std::size_t> seen(c.wires(), 0);
    t.gate_segment.reserve(c.gates.size());
    for (const auto &gate : c.gates) {
        std::array<std::size_t, 2> seg{seen[gate.q0]++, Gate::none};
        if (gate.kind == GateKind::CNOT) seg[1] = seen[gate.q1]++;
        t.gate_segment.push_back(seg);
    }
    return t;
}

CliffordCircuit gen_repetition(std::size_t n0, std::size_t ncyc) {
    if (n0 < 2) throw std::invalid_argument("repetition circuit needs n0 >= 2");
    if (ncyc < 1) throw std::invalid_argument("repetition circuit needs ncyc >= 1");
    CliffordCircuit c;
    c.n0 = n0;
    c.na = n0 * ncyc;
    for (std::size_t cyc = 0; cyc < ncyc; ++cyc) {
        if (cyc > 0) {
            for (std::size_t i = 0; i < n0; ++i) c.gates.push_back({GateKind::I, i, Gate::none});
        }
        for (std::size_t i = 0; i < n0; ++i) {
            std::size_t a = n0 + cyc * n0 + i;
            c.gates.push_back({GateKind::CNOT, i, a});
            c.gates.push_back({GateKind::CNOT, (i + 1) % n0, a});
        }
    }
    for (std::size_t i = 0; i < n0; ++i) {
        SymplecticVector s(n0);
        s.z.set(i);
        s.z.set((i + 1) % n0);
        c.stabilizers.push_back(std::move(s));
    }
    SymplecticVector zl(n0), xl(n0);
    zl.z.set(0);
    for (std::size_t i = 0; i < n0; ++i) xl.x.set(i);
    c.logicals = {zl, xl};
    return pad_odd_locations(c);
}

CliffordCircuit gen_rotated_toric(std::size_t t, std::size_t ncyc) {
    if (t < 1) throw std::invalid_argument("rotated toric circuit needs t >= 1");
    if (ncyc < 1) throw std::invalid_argument("rotated toric circuit needs ncyc >= 1");
    const std::size_t n0 = t * t + (t + 1) * (t + 1);
    CliffordCircuit c;
    c.n0 = n0;
    c.na = n0 * ncyc;
    auto cx_layer = [&](std::size_t cyc, std::size_t shift) {
        for (std::size_t i = 0; i < n0; ++i) c.gates.push_back({GateKind::CNOT, n0 + cyc * n0 + i, (i + shift) % n0});
    };
    auto h_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t w = begin; w < end; ++w) c.gates.push_back({GateKind::H, w, Gate::none});
    };
    for (std::size_t cyc = 0; cyc < ncyc; ++cyc) {
        if (cyc > 0) {
            for (std::size_t i = 0; i < n0; ++i) c.gates.push_back({GateKind::I, i, Gate::none});
        }
        std::size_t a0 = n0 + cyc * n0;
        h_range(a0, a0 + n0);
        cx_layer(cyc, t);  // X factor
        h_range(0, n0);
        cx_layer(cyc, 0);          // Z factor, data in the Hadamard frame
        cx_layer(cyc, 2 * t + 1);  // Z factor
        h_range(0, n0);
        cx_layer(cyc, t + 1);  // X factor
        h_range(a0, a0 + n0);
    }
    for (std::size_t i = 0; i < n0; ++i) {
        SymplecticVector s(n0);
        s.z.flip(i);
        s.x.flip((i + t) % n0);
        s.x.flip((i + t + 1) % n0);
        s.z.flip((i + 2 * t + 1) % n0);
        c.stabilizers.push_back(std::move(s));
    }
    SymplecticVector xl(n0), zl(n0);
    for (std::size_t i = 0; i < n0; ++i) {
        xl.x.set(i);
        zl.z.set(i);
    }
    c.logicals = {xl, zl};
    return pad_odd_locations(c);
}

}  // namespace eegdec
