#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "eegdec/circuit.hpp"
#include "eegdec/decode.hpp"
#include "eegdec/eeg.hpp"
#include "eegdec/ising.hpp"
#include "eegdec/noise.hpp"
#include "eegdec/reduce.hpp"
#include "eegdec/table.hpp"

#ifndef EEGDEC_VERSION
#define EEGDEC_VERSION "unknown"
#endif

namespace {

using namespace eegdec;

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kInvalid = 3;
constexpr int kCap = 4;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SystemArgs {
    std::string family;
    std::size_t n0 = 3;
    std::size_t t = 1;
    std::size_t cycles = 1;
    std::string circuit;
};

void add_system_options(CLI::App *cmd, SystemArgs &a) {
    cmd->add_option("--family", a.family, "Circuit family")->check(CLI::IsMember({"rep", "rtor"}));
    cmd->add_option("--n0", a.n0, "Data qubits of the repetition family");
    cmd->add_option("--t", a.t, "Size parameter of the rotated toric family");
    cmd->add_option("--cycles", a.cycles, "Measurement cycles");
    cmd->add_option("--circuit", a.circuit, "Circuit file");
}

CliffordCircuit make_family(const std::string &family, std::size_t size, std::size_t cycles) {
    if (family == "rep") return gen_repetition(size, cycles);
    if (family == "rtor") return gen_rotated_toric(size, cycles);
    throw UsageError("unknown family '" + family + "'");
}

CliffordCircuit load_circuit(const SystemArgs &a) {
    if (!a.circuit.empty()) {
        if (!a.family.empty()) throw UsageError("--circuit and --family are exclusive");
        std::ifstream in(a.circuit);
        if (!in) throw UsageError("cannot open circuit file '" + a.circuit + "'");
        return parse_circuit(in);
    }
    if (a.family.empty()) throw UsageError("one of --family or --circuit is required");
    return make_family(a.family, a.family == "rep" ? a.n0 : a.t, a.cycles);
}

std::string command_line(int argc, char **argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

void provenance(std::ostream &out, const std::string &cmdline) {
    out << "# eegdec " << EEGDEC_VERSION << "\n# command: " << cmdline << '\n';
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_metadata(std::ostream &out, const EEGMatrices &m) {
    const CircuitParams &p = m.params;
    out << "N=" << p.N << "\nn0=" << p.n0 << "\nna=" << p.na << "\nk=" << p.k << "\nr0=" << p.r0
        << "\nkappa=" << p.kappa << "\nf=" << p.f << "\nrankG=" << p.rank_g << "\nrankH=" << p.rank_h
        << "\nell1=" << p.ell1() << "\nG=" << m.G.rows() << 'x' << m.G.cols() << "\nH=" << m.H.rows() << 'x'
        << m.H.cols() << "\nL=" << m.L.rows() << 'x' << m.L.cols() << '\n';
}

int cmd_build(const SystemArgs &sys, const std::string &out_dir, const std::string &cmdline) {
    EEGMatrices m = build_eeg(load_circuit(sys));
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto write = [&](const std::string &name, const BinaryMatrix &mat) {
        std::ofstream f(fs::path(out_dir) / name);
        write_matrix_market(f, mat);
        if (!f) throw std::runtime_error("cannot write " + name);
    };
    write("G.mtx", m.G);
    write("H.mtx", m.H);
    write("L.mtx", m.L);
    std::ofstream meta(fs::path(out_dir) / "meta.txt");
    provenance(meta, cmdline);
    write_metadata(meta, m);
    provenance(std::cout, cmdline);
    write_metadata(std::cout, m);
    return kOk;
}

struct ReduceArgs {
    std::string model = "iid:0.05";
    std::string reduction = "full";
    std::size_t max_weight = 0;
    std::size_t final_cap = 19;
    std::vector<double> epsilon;
    std::size_t chi = 0;
    std::string out;
};

int cmd_reduce(const SystemArgs &sys, const ReduceArgs &a, const std::string &cmdline) {
    EEGMatrices m = build_eeg(load_circuit(sys));
    ErrorModel model = parse_model_spec(a.model, m.params.N);
    ReduceOptions ro;
    ro.track_dual = !a.out.empty();
    ReducedSystem r;
    std::string stage;
    if (a.max_weight) {
        r = reduce_up_to_weight(ReducedSystem::from_circuit(m, model, ro), a.max_weight);
        stage = "w" + std::to_string(a.max_weight);
    } else {
        auto red = parse_reduction(a.reduction);
        if (!red) throw UsageError("unknown reduction '" + a.reduction + "'");
        r = reduce_circuit(m, model, *red, a.final_cap, ro);
        stage = a.reduction;
    }
    if (a.chi) r = truncate(std::move(r), a.chi);
    provenance(std::cout, cmdline);
    std::cout << "stage,gauge_rows,logical_rows,bonds,min_weight,complete";
    for (double eps : a.epsilon) std::cout << ",m_eps_" << format_double(eps);
    std::cout << '\n'
              << stage << ',' << r.gauge_rows() << ',' << r.logical_rows() << ',' << r.bond_count() << ','
              << r.min_gauge_weight() << ',' << (r.complete() ? 1 : 0);
    for (double eps : a.epsilon) std::cout << ',' << count_above(r, eps);
    std::cout << '\n';
    if (!a.out.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(a.out);
        std::ofstream th(fs::path(a.out) / "theta.mtx");
        write_matrix_market(th, r.theta());
        std::ofstream hd(fs::path(a.out) / "hdual.mtx");
        write_matrix_market(hd, r.hdual());
        std::ofstream k(fs::path(a.out) / "K.txt");
        provenance(k, cmdline);
        k << "log_const=" << format_double(r.log_const()) << '\n';
        for (double v : r.K()) k << format_double(v) << '\n';
    }
    return kOk;
}

struct TableArgs {
    std::string family;
    std::vector<std::string> sets;
    double p = 0.05;
    std::vector<double> epsilon{1e-2, 1e-1};
    bool w4 = false;
    std::size_t final_cap = 19;
};

std::pair<std::size_t, std::size_t> parse_set(const std::string &s) {
    auto colon = s.find(':');
    if (colon == std::string::npos) throw UsageError("--set expects size:cycles, got '" + s + "'");
    try {
        return {std::stoul(s.substr(0, colon)), std::stoul(s.substr(colon + 1))};
    } catch (const std::exception &) {
        throw UsageError("--set expects size:cycles, got '" + s + "'");
    }
}

int cmd_table(const TableArgs &a, const std::string &cmdline) {
    TableOptions opt;
    opt.p = a.p;
    opt.epsilons = a.epsilon;
    opt.with_w4 = a.w4;
    opt.final_cap = a.final_cap;
    std::vector<std::string> sets = a.sets;
    if (sets.empty() && a.family == "rep") sets = {"3:1", "5:1", "7:1", "3:2", "5:2", "7:2", "3:3", "5:3", "7:3"};
    if (sets.empty() && a.family == "rtor") sets = {"1:1", "1:2", "1:3", "2:1", "2:2", "2:3", "3:1", "3:2"};
    if (!sets.empty() && a.family.empty()) throw UsageError("--set needs --family");
    std::vector<std::string> lines;
    for (const auto &s : sets) {
        auto [size, cycles] = parse_set(s);
        std::size_t d0 = a.family == "rep" ? size : 2 * size + 1;
        lines.push_back(format_row(table_row(make_family(a.family, size, cycles), cycles, d0, opt), opt));
    }
    provenance(std::cout, cmdline);
    std::cout << table_header(opt) << '\n';
    for (const auto &l : lines) std::cout << l << '\n';
    return kOk;
}

struct DecodeArgs {
    std::string model = "depol:0.05";
    std::string decoder = "ml";
    std::string reduction = "full";
    std::string syndrome;
    std::size_t final_cap = 19;
    std::size_t max_spins = 26;
};

DecoderSpec decoder_spec(const std::string &decoder, const std::string &reduction, std::size_t final_cap,
                         std::size_t max_spins) {
    DecoderSpec spec;
    auto kind = parse_decoder(decoder);
    if (!kind) throw UsageError("unknown decoder '" + decoder + "'");
    auto red = parse_reduction(reduction);
    if (!red) throw UsageError("unknown reduction '" + reduction + "'");
    spec.kind = *kind;
    spec.reduction = *red;
    spec.final_cap = final_cap;
    spec.enumeration.max_spins = max_spins;
    return spec;
}

int cmd_decode(const SystemArgs &sys, const DecodeArgs &a, const std::string &cmdline) {
    EEGMatrices m = build_eeg(load_circuit(sys));
    ErrorModel model = parse_model_spec(a.model, m.params.N);
    if (a.syndrome.size() != m.params.na) {
        throw UsageError("--syndrome needs " + std::to_string(m.params.na) + " bits");
    }
    BitVector sigma = BitVector::from_string(a.syndrome);
    Decoder dec(m, model, decoder_spec(a.decoder, a.reduction, a.final_cap, a.max_spins));
    DecodeResult r = dec.decode(sigma);
    provenance(std::cout, cmdline);
    std::cout << "class " << r.alpha.to_string() << '\n';
    std::cout << "alpha,log_prob\n";
    for (std::size_t i = 0; i < r.log_probs.size(); ++i) {
        std::cout << BitVector::from_uint(m.L.rows(), i).to_string() << ',' << format_double(r.log_probs[i]) << '\n';
    }
    return kOk;
}

struct SimulateArgs {
    std::string model;
    std::string noise = "depol";
    std::vector<double> p{0.01};
    std::vector<std::string> decoders{"ml"};
    std::string reduction = "full";
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::size_t final_cap = 19;
    std::size_t max_spins = 26;
};

int cmd_simulate(const SystemArgs &sys, const SimulateArgs &a, const std::string &cmdline) {
    EEGMatrices m = build_eeg(load_circuit(sys));
    std::vector<std::string> models;
    if (!a.model.empty()) {
        models.push_back(a.model);
    } else {
        for (double p : a.p) models.push_back(a.noise + ":" + format_double(p));
    }
    std::vector<std::string> lines;
    for (const auto &spec : models) {
        ErrorModel model = parse_model_spec(spec, m.params.N);
        for (const auto &d : a.decoders) {
            DecoderSpec ds = decoder_spec(d, a.reduction, a.final_cap, a.max_spins);
            Decoder dec(m, model, ds);
            SimReport rep = monte_carlo(m, model, dec, a.trials, a.seed);
            std::ostringstream line;
            line << spec << ',' << rep.decoder << ',' << rep.reduction << ',' << rep.trials << ',' << rep.failures
                 << ',' << format_double(rep.failure_rate()) << ',' << rep.seed;
            lines.push_back(line.str());
        }
    }
    provenance(std::cout, cmdline);
    std::cout << "model,decoder,reduction,trials,failures,failure_rate,seed\n";
    for (const auto &l : lines) std::cout << l << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Error-equivalence-group decoding of Clifford measurement circuits"};
    app.require_subcommand(1);
    const std::string cmdline = command_line(argc, argv);

    SystemArgs sys;
    std::string build_out = ".";
    auto *build = app.add_subcommand("build", "Write G, H, L and metadata");
    add_system_options(build, sys);
    build->add_option("--out", build_out, "Output directory");

    ReduceArgs ra;
    auto *reduce = app.add_subcommand("reduce", "Row-reduce the generator matrix");
    add_system_options(reduce, sys);
    reduce->add_option("--model", ra.model, "iid:p, depol:p or file:path");
    reduce->add_option("--reduction", ra.reduction, "w2, w3, full or complete");
    reduce->add_option("--max-weight", ra.max_weight, "Reduce rows up to this weight instead");
    reduce->add_option("--final-cap", ra.final_cap, "Weight cap of the final stage");
    reduce->add_option("--epsilon", ra.epsilon, "Report m_eps for these thresholds");
    reduce->add_option("--chi", ra.chi, "Keep only the chi largest coefficients");
    reduce->add_option("--out", ra.out, "Write theta, dual and coefficients here");

    TableArgs ta;
    auto *table = app.add_subcommand("table", "Generator matrix dimensions along the reduction");
    table->add_option("--family", ta.family, "Circuit family")->check(CLI::IsMember({"rep", "rtor"}));
    table->add_option("--set", ta.sets, "size:cycles (n0 for rep, t for rtor); default: the standard sets");
    table->add_option("--p", ta.p, "iid X/Z error probability");
    table->add_option("--epsilon", ta.epsilon, "Thresholds for m_eps");
    table->add_flag("--w4", ta.w4, "Include the w=4 stage");
    table->add_option("--final-cap", ta.final_cap, "Weight cap of the final stage");

    DecodeArgs da;
    auto *decode = app.add_subcommand("decode", "Decode one syndrome");
    add_system_options(decode, sys);
    decode->add_option("--model", da.model, "iid:p, depol:p or file:path");
    decode->add_option("--decoder", da.decoder, "ml, me or oracle");
    decode->add_option("--reduction", da.reduction, "none, w2, w3, full or complete");
    decode->add_option("--syndrome", da.syndrome, "Syndrome bits, one per ancilla")->required();
    decode->add_option("--final-cap", da.final_cap, "Weight cap of the final stage");
    decode->add_option("--max-spins", da.max_spins, "Largest spin count enumerated");

    SimulateArgs sa;
    auto *simulate = app.add_subcommand("simulate", "Monte-Carlo logical failure rate");
    add_system_options(simulate, sys);
    simulate->add_option("--model", sa.model, "iid:p, depol:p or file:path (overrides --p)");
    simulate->add_option("--noise", sa.noise, "Model form used with --p")->check(CLI::IsMember({"iid", "depol"}));
    simulate->add_option("--p", sa.p, "Error probabilities");
    simulate->add_option("--decoder", sa.decoders, "ml, me or oracle");
    simulate->add_option("--reduction", sa.reduction, "none, w2, w3, full or complete");
    simulate->add_option("--trials", sa.trials, "Trials per row");
    simulate->add_option("--seed", sa.seed, "Random seed");
    simulate->add_option("--final-cap", sa.final_cap, "Weight cap of the final stage");
    simulate->add_option("--max-spins", sa.max_spins, "Largest spin count enumerated");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*build) return cmd_build(sys, build_out, cmdline);
        if (*reduce) return cmd_reduce(sys, ra, cmdline);
        if (*table) return cmd_table(ta, cmdline);
        if (*decode) return cmd_decode(sys, da, cmdline);
        if (*simulate) return cmd_simulate(sys, sa, cmdline);
    } catch (const UsageError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const ValidationError &e) {
        std::cerr << "validation failed (" << e.identity() << "): " << e.what() << '\n';
        return kInvalid;
    } catch (const CapExceeded &e) {
        std::cerr << "error: " << e.what() << "; try --reduction w3, full or complete\n";
        return kCap;
    } catch (const WeightCapExceeded &e) {
        std::cerr << "error: " << e.what() << "; try a smaller --final-cap\n";
        return kCap;
    } catch (const std::invalid_argument &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kUsage;
}
