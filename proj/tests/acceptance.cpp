#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eegdec/decode.hpp"
#include "eegdec/table.hpp"
#include "support.hpp"

using namespace eegdec;
using eegdec::testing::brute_log_z;
using eegdec::testing::marginal_deviation;
using eegdec::testing::pick_spin;
using eegdec::testing::random_bits;
using eegdec::testing::random_ising;

namespace {

struct RepReference {
    std::size_t n0, ncyc;
    Dims orig, w2, w3, fin;
    std::size_t w_fin, m_2, m_1, ell1;
};

// Reference structural values for the repetition sets; m_2 and m_1 are m_eps
// at eps = 1e-2 and 1e-1, p = 0.05.
constexpr std::array<RepReference, 9> kRep = {{
    {3, 1, {30, 36}, {3, 10}, {0, 10}, {0, 10}, 0, 10, 10, 7},
    {5, 1, {50, 60}, {5, 16}, {0, 16}, {0, 16}, 0, 16, 16, 11},
    {7, 1, {70, 84}, {7, 22}, {0, 22}, {0, 22}, 0, 22, 22, 15},
    {3, 2, {72, 78}, {9, 19}, {3, 19}, {2, 43}, 21, 38, 21, 10},
    {5, 2, {120, 130}, {15, 31}, {5, 31}, {3, 79}, 21, 69, 34, 16},
    {7, 2, {168, 182}, {21, 43}, {7, 43}, {4, 115}, 21, 99, 48, 22},
    {3, 3, {102, 108}, {15, 28}, {6, 27}, {4, 75}, 35, 69, 31, 13},
    {5, 3, {170, 180}, {25, 46}, {10, 45}, {7, 116}, 20, 104, 50, 21},
    {7, 3, {238, 252}, {35, 64}, {14, 63}, {10, 157}, 20, 140, 69, 29},
}};

struct RtorReference {
    std::size_t t, ncyc;
    Dims orig;
    std::size_t ell1;
};

constexpr std::array<RtorReference, 8> kRtor = {{
    {1, 1, {130, 140}, 11},
    {1, 2, {280, 290}, 16},
    {1, 3, {410, 420}, 21},
    {2, 1, {338, 364}, 27},
    {2, 2, {728, 754}, 40},
    {2, 3, {1066, 1092}, 53},
    {3, 1, {650, 700}, 51},
    {3, 2, {1400, 1450}, 76},
}};

constexpr double kColumnTolerance = 0.15;
constexpr double kStarPolygonRelTol = 1e-9;
constexpr double kStarPolygonZTol = 1e-10;
constexpr double kDecodeRelTol = 1e-6;
constexpr double kNormalizationTol = 1e-9;
constexpr double kSigmaBand = 3.0;

constexpr double kLimit1 = 10.0;
constexpr double kLimit4 = 60.0;
constexpr double kLimit5 = 30.0;
constexpr double kLimit6 = 600.0;
constexpr double kLimit8 = 300.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string dims(Dims d) { return std::to_string(d.rows) + "x" + std::to_string(d.cols); }

void info(const std::string &s) { std::printf("  %s\n", s.c_str()); }

std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string set_name(const RepReference &r) {
    return "(" + std::to_string(r.n0) + "," + std::to_string(r.n0 * r.ncyc) + "," + std::to_string(r.ncyc) + ")";
}

const std::vector<TableRow> &rep_rows() {
    static const std::vector<TableRow> rows = [] {
        std::vector<TableRow> out;
        for (const auto &ref : kRep) out.push_back(table_row(gen_repetition(ref.n0, ref.ncyc), ref.ncyc, ref.n0));
        return out;
    }();
    return rows;
}

struct Outcome {
    bool pass;
    std::string summary;
};

Outcome criterion1() {
    auto t0 = Clock::now();
    std::size_t bad = 0;
    for (const auto &ref : kRep) {
        TableRow row = table_row(gen_repetition(ref.n0, ref.ncyc), ref.ncyc, ref.n0);
        bool ok = row.orig == ref.orig && row.w2.rows == ref.w2.rows && row.w3.rows == ref.w3.rows;
        bad += !ok;
        info(set_name(ref) + " orig " + dims(row.orig) + " (ref " + dims(ref.orig) + ")  w2 rows " +
             std::to_string(row.w2.rows) + " (ref " + std::to_string(ref.w2.rows) + ")  w3 rows " +
             std::to_string(row.w3.rows) + " (ref " + std::to_string(ref.w3.rows) + ")" + (ok ? "" : "  MISMATCH"));
    }
    double t = seconds_since(t0);
    bool pass = bad == 0 && t < kLimit1;
    return {pass, std::to_string(kRep.size() - bad) + "/" + std::to_string(kRep.size()) +
                      " sets match original dims and w2/w3 row counts, " + fmt("%.2f s", t)};
}

Outcome criterion2() {
    std::size_t cells = 0, bad = 0;
    double worst = 0.0;
    const auto &rows = rep_rows();
    for (std::size_t i = 0; i < kRep.size(); ++i) {
        const auto &ref = kRep[i];
        const auto &row = rows[i];
        const std::array<std::pair<const char *, std::pair<std::size_t, std::size_t>>, 5> c = {{
            {"w2 cols", {row.w2.cols, ref.w2.cols}},
            {"w3 cols", {row.w3.cols, ref.w3.cols}},
            {"final cols", {row.final_dims.cols, ref.fin.cols}},
            {"m_eps(1e-2)", {row.m_eps.at(0), ref.m_2}},
            {"m_eps(1e-1)", {row.m_eps.at(1), ref.m_1}},
        }};
        std::string line = set_name(ref);
        for (const auto &[name, v] : c) {
            const double dev = (double(v.first) - double(v.second)) / double(v.second);
            const bool ok = ref.ncyc == 1 ? v.first == v.second : std::abs(dev) <= kColumnTolerance;
            ++cells;
            bad += !ok;
            worst = std::max(worst, std::abs(dev));
            line += std::string("  ") + name + " " + std::to_string(v.first) + "/" + std::to_string(v.second) + " " +
                    fmt("%+.0f%%", 100 * dev) + (ok ? "" : "!");
        }
        info(line);
    }
    return {bad == 0, std::to_string(cells - bad) + "/" + std::to_string(cells) +
                          " column cells within tolerance (exact for single cycle, 15% otherwise), worst " +
                          fmt("%.0f%%", 100 * worst)};
}

Outcome criterion3() {
    std::size_t bad = 0, total = 0;
    std::string line = "rep";
    for (const auto &ref : kRep) {
        auto p = build_eeg(gen_repetition(ref.n0, ref.ncyc)).params;
        ++total;
        bad += p.ell1() != ref.ell1;
        line += " " + std::to_string(p.ell1()) + "/" + std::to_string(ref.ell1);
    }
    info(line);
    line = "rtor";
    for (const auto &ref : kRtor) {
        auto m = build_eeg(gen_rotated_toric(ref.t, ref.ncyc));
        ++total;
        const bool ok = m.params.ell1() == ref.ell1;
        bad += !ok;
        line += " " + std::to_string(m.params.ell1()) + "/" + std::to_string(ref.ell1);
        if (Dims{m.G.rows(), 2 * m.params.N} != ref.orig) {
            info("rtor t=" + std::to_string(ref.t) + " ncyc=" + std::to_string(ref.ncyc) + " orig " +
                 dims({m.G.rows(), 2 * m.params.N}) + " differs from " + dims(ref.orig));
        }
    }
    info(line);
    return {bad == 0, std::to_string(total - bad) + "/" + std::to_string(total) + " ell1 values match"};
}

// Independent recomputation by elimination; kappa = 0 for circuits that
// measure every stabilizer generator of the input code.
bool check_ranks(const EEGMatrices &m, std::string &why) {
    const auto &p = m.params;
    const std::size_t rg = rank(m.G), rl = rank(m.L), rh = rank(m.H);
    const std::size_t two_n = 2 * p.N;
    if (rl != 2 * p.k) return why = "rank L", false;
    if (!(m.H * m.G.transposed()).is_zero() || !(m.H * m.L.transposed()).is_zero()) return why = "H orthogonality", false;
    if (rg + rl + rh != two_n) return why = "rank H = 2N - rank G - rank L", false;
    if (rg > two_n - 2 * p.n0) return why = "f >= 0", false;
    const std::size_t f = two_n - 2 * p.n0 - rg;
    if (f != p.na - p.r0) return why = "f = na - kappa - r0", false;
    if (rh != p.na + p.r0) return why = "rank H = na - kappa + r0", false;
    return true;
}

Outcome criterion4() {
    auto t0 = Clock::now();
    std::size_t bad = 0, total = 0;
    auto run = [&](const std::string &name, const CliffordCircuit &c) {
        ++total;
        std::string why;
        bool ok = false;
        try {
            ok = check_ranks(build_eeg(c), why);
        } catch (const std::exception &e) {
            why = e.what();
        }
        if (!ok) {
            ++bad;
            info(name + " violates " + why);
        }
    };
    for (const auto &ref : kRep) run("rep" + set_name(ref), gen_repetition(ref.n0, ref.ncyc));
    for (const auto &ref : kRtor) {
        if (ref.t <= 2) run("rtor t=" + std::to_string(ref.t), gen_rotated_toric(ref.t, ref.ncyc));
    }
    double t = seconds_since(t0);
    return {bad == 0 && t < kLimit4, std::to_string(total - bad) + "/" + std::to_string(total) +
                                         " circuits satisfy the rank identities, " + fmt("%.2f s", t)};
}

double reduced_log_z(const ReducedSystem &r, const BitVector &e) {
    return r.log_const() + brute_log_z(r.theta(), r.K(), r.lineage().left_multiply(e));
}

Outcome criterion5() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(20240917);
    double worst_marginal = 0.0, worst_z = 0.0;
    std::size_t steps = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t spins = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
        const std::size_t bonds = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
        IsingSystem s = random_ising(spins, bonds, rng, 2.0);
        BitVector mask = random_bits(bonds, rng);
        ReducedSystem r = ReducedSystem::from_ising(s, spins, mask);
        BitVector e = random_bits(bonds, rng);
        e &= mask;
        double z_prev = reduced_log_z(r, e);
        const std::size_t count = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(4, spins))(rng);
        for (std::size_t k = 0; k < count; ++k) {
            std::size_t spin = pick_spin(r, rng, 12);
            if (spin == BitVector::npos) break;
            r.reduce_spin_inplace(spin, true);
            ++steps;
            double z = reduced_log_z(r, e);
            worst_z = std::max(worst_z, std::abs(std::expm1(z - z_prev)));
            z_prev = z;
            worst_marginal = std::max(worst_marginal, marginal_deviation(s, r, e));
        }
    }
    double t = seconds_since(t0);
    info("marginal relative error " + fmt("%.2e", worst_marginal) + ", Z relative change per step " +
         fmt("%.2e", worst_z));
    bool pass = worst_marginal <= kStarPolygonRelTol && worst_z <= kStarPolygonZTol && t < kLimit5;
    return {pass, "200 systems, " + std::to_string(steps) + " reductions, " + fmt("%.2f s", t)};
}

std::vector<SymplecticVector> output_bases(const EEGMatrices &m) {
    std::map<std::string, SymplecticVector> seen;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << (2 * m.params.n0)); ++v) {
        SymplecticVector b = canonical_base(m, SymplecticVector::from_flat(BitVector::from_uint(2 * m.params.n0, v)));
        seen.emplace(b.flat().to_string(), b);
    }
    std::vector<SymplecticVector> out;
    for (auto &kv : seen) out.push_back(kv.second);
    return out;
}

Outcome criterion6() {
    auto t0 = Clock::now();
    EEGMatrices m = build_eeg(eegdec::testing::rep3_round());
    ErrorModel model = depolarizing(m.params.N, 0.1);
    EnumerationOptions opt;
    opt.max_spins = 24;
    const double norm = log_normalizer(model);
    ReducedSystem r = reduce_circuit(m, model, Reduction::full);
    info("N=" + std::to_string(m.params.N) + " rank G=" + std::to_string(rank(m.G)) + ", reduced system " +
         dims({r.gauge_rows(), r.bond_count()}));
    double worst = 0.0, total = 0.0;
    const auto bases = output_bases(m);
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << m.params.na); ++s) {
        BitVector sigma = BitVector::from_uint(m.params.na, s);
        for (const auto &base : bases) {
            DecodeResult full = ml_decode(m, model, sigma, base, opt);
            DecodeResult red = ml_decode(r, m, sigma, base, norm, opt);
            const double fmax = *std::max_element(full.log_probs.begin(), full.log_probs.end());
            const double rmax = *std::max_element(red.log_probs.begin(), red.log_probs.end());
            for (std::size_t a = 0; a < full.log_probs.size(); ++a) {
                const double want = full.log_probs[a] - fmax;
                const double got = red.log_probs[a] - rmax;
                worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
                total += std::exp(full.log_probs[a]);
            }
        }
    }
    double t = seconds_since(t0);
    info("max relative deviation " + fmt("%.2e", worst) + ", total probability over classes x syndromes x bases " +
         fmt("%.12f", total));
    bool pass = worst <= kDecodeRelTol && std::abs(total - 1.0) <= kNormalizationTol && t < kLimit6;
    return {pass, std::to_string(bases.size()) + " output bases x 4 syndromes x 4 classes, " + fmt("%.1f s", t)};
}

Outcome criterion7() {
    EEGMatrices m = build_eeg(gen_repetition(3, 1));
    const auto bases = output_bases(m);
    std::size_t checked = 0, bad = 0;
    for (const char *form : {"iid", "depol"}) {
        for (double p : {0.01, 0.05}) {
            ErrorModel model = std::string(form) == "iid" ? iid_xz(m.params.N, p, p) : depolarizing(m.params.N, p);
            EnumerationOptions opt;
            opt.max_spins = 30;
            std::vector<Decoder> ml;
            for (auto red : {Reduction::none, Reduction::w2, Reduction::w3, Reduction::full, Reduction::complete}) {
                ml.emplace_back(m, model, DecoderSpec{DecoderKind::ml, red, 19, opt});
            }
            Decoder me(m, model, DecoderSpec{DecoderKind::me, Reduction::complete});
            std::string line = std::string(form) + " p=" + fmt("%g", p) + " decisions per syndrome (one digit per base)";
            for (std::uint64_t s = 0; s < (std::uint64_t{1} << m.params.na); ++s) {
                BitVector sigma = BitVector::from_uint(m.params.na, s);
                line += " ";
                for (const auto &base : bases) {
                    const std::uint64_t ref = ml[0].decode(sigma, base).chosen();
                    bool ok = true;
                    for (const auto &d : ml) ok &= d.decode(sigma, base).chosen() == ref;
                    ok &= me.decode(sigma, base).chosen() == ref;
                    ++checked;
                    bad += !ok;
                    line += std::to_string(ref) + (ok ? "" : "!");
                }
            }
            info(line);
        }
    }
    return {bad == 0, std::to_string(checked - bad) + "/" + std::to_string(checked) +
                          " (syndrome, output base) pairs agree across none/w2/w3/full/complete ML and complete ME"};
}

Outcome criterion8() {
    auto t0 = Clock::now();
    EEGMatrices m = build_eeg(gen_repetition(3, 1));
    constexpr std::size_t trials = 10000;
    constexpr std::uint64_t seed = 8;
    bool pass = true;
    std::vector<double> rates;
    for (double p : {0.01, 0.02, 0.05}) {
        ErrorModel model = depolarizing(m.params.N, p);
        Decoder ml(m, model, DecoderSpec{DecoderKind::ml, Reduction::full});
        SimReport a = monte_carlo(m, model, ml, trials, seed, true);
        rates.push_back(a.failure_rate());
        std::string line = "p=" + fmt("%g", p) + " failures " + std::to_string(a.failures) + "/" +
                           std::to_string(trials);
        if (p == 0.01) {
            Decoder oracle(m, model, DecoderSpec{DecoderKind::oracle, Reduction::none});
            SimReport b = monte_carlo(m, model, oracle, trials, seed, true);
            std::size_t same = 0;
            for (std::size_t i = 0; i < trials; ++i) same += a.decisions[i] == b.decisions[i];
            pass &= same == trials;
            line += ", identical decisions " + std::to_string(same) + "/" + std::to_string(trials);
        }
        info(line);
    }
    for (std::size_t i = 0; i + 1 < rates.size(); ++i) {
        const double sd = std::sqrt(rates[i] * (1 - rates[i]) / trials + rates[i + 1] * (1 - rates[i + 1]) / trials);
        pass &= rates[i] <= rates[i + 1] + kSigmaBand * sd;
    }
    double t = seconds_since(t0);
    pass &= t < kLimit8;
    return {pass, "reduced ML vs oracle and failure-rate ordering, " + fmt("%.1f s", t)};
}

Outcome criterion9() {
    const std::vector<double> grid = {1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0, 3.0};
    std::size_t systems = 0, bad = 0;
    auto check = [&](const ReducedSystem &r) {
        ++systems;
        std::size_t prev = r.bond_count();
        for (double eps : grid) {
            const std::size_t c = count_above(r, eps);
            if (c > prev) {
                ++bad;
                return;
            }
            prev = c;
        }
    };
    for (const auto &ref : kRep) {
        EEGMatrices m = build_eeg(gen_repetition(ref.n0, ref.ncyc));
        ErrorModel model = iid_xz(m.params.N, 0.05, 0.05);
        ReduceOptions opt;
        opt.track_dual = false;
        ReducedSystem r = ReducedSystem::from_circuit(m, model, opt);
        check(r);
        r = reduce_up_to_weight(std::move(r), 2);
        check(r);
        r = reduce_up_to_weight(std::move(r), 3);
        check(r);
        r = full_reduce(std::move(r), 19);
        check(r);
    }
    const auto &ref = kRep[3];
    const auto &row = rep_rows()[3];
    bool ok = true;
    std::string line = set_name(ref) + " final stage";
    for (std::size_t i = 0; i < 2; ++i) {
        const std::size_t want = i == 0 ? ref.m_2 : ref.m_1;
        const double dev = (double(row.m_eps[i]) - double(want)) / double(want);
        ok &= std::abs(dev) <= kColumnTolerance;
        line += std::string("  m_eps(") + (i == 0 ? "1e-2" : "1e-1") + ") " + std::to_string(row.m_eps[i]) + "/" +
                std::to_string(want) + " " + fmt("%+.0f%%", 100 * dev);
    }
    info(line);
    info(std::to_string(systems - bad) + "/" + std::to_string(systems) + " systems monotone in eps");
    return {bad == 0 && ok, "monotone on " + std::to_string(systems - bad) + "/" + std::to_string(systems) +
                                " systems; (3,6,2) m_eps " + (ok ? "within" : "outside") + " 15%"};
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Acceptance suite"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);
    if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};

    const std::array<std::function<Outcome()>, 9> criteria = {criterion1, criterion2, criterion3,
                                                              criterion4, criterion5, criterion6,
                                                              criterion7, criterion8, criterion9};
    const std::array<const char *, 9> names = {"repetition structure rows", "repetition column counts",
                                               "ell1",                      "rank identities",
                                               "star-polygon oracle",       "decoding equivalence",
                                               "reduction-sequence argmax", "Monte-Carlo decisions",
                                               "thresholding"};
    int failed = 0;
    for (int c : selected) {
        std::printf("criterion %d: %s\n", c, names[c - 1]);
        std::fflush(stdout);
        Outcome o;
        try {
            o = criteria[c - 1]();
        } catch (const std::exception &e) {
            o = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c, names[c - 1], o.summary.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed == 0 ? 0 : 1;
}
