#include "eegdec/decode.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_map>

namespace eegdec {

namespace {

std::size_t class_count(const EEGMatrices &m) {
    if (m.L.rows() > 20) throw std::invalid_argument("decoding supports at most 20 logical rows");
    return std::size_t{1} << m.L.rows();
}

void check_sigma(const EEGMatrices &m, const BitVector &sigma) {
    if (sigma.size() != m.params.na) {
        throw std::invalid_argument("syndrome has " + std::to_string(sigma.size()) + " bits, expected " +
                                    std::to_string(m.params.na));
    }
}

BitVector alpha_bits(std::size_t rows, std::size_t a) { return BitVector::from_uint(rows, a); }

}  // namespace

std::string_view to_string(DecodeMethod m) {
    switch (m) {
        case DecodeMethod::ml_full: return "ml_full";
        case DecodeMethod::ml_reduced: return "ml_reduced";
        case DecodeMethod::me: return "me";
        case DecodeMethod::oracle: return "oracle";
    }
    return "?";
}

std::string_view to_string(Reduction r) {
    switch (r) {
        case Reduction::none: return "none";
        case Reduction::w2: return "w2";
        case Reduction::w3: return "w3";
        case Reduction::full: return "full";
        case Reduction::complete: return "complete";
    }
    return "?";
}

std::optional<Reduction> parse_reduction(std::string_view s) {
    if (s == "none") return Reduction::none;
    if (s == "w2") return Reduction::w2;
    if (s == "w3") return Reduction::w3;
    if (s == "full") return Reduction::full;
    if (s == "complete") return Reduction::complete;
    return std::nullopt;
}

std::string_view to_string(DecoderKind k) {
    switch (k) {
        case DecoderKind::ml: return "ml";
        case DecoderKind::me: return "me";
        case DecoderKind::oracle: return "oracle";
    }
    return "?";
}

std::optional<DecoderKind> parse_decoder(std::string_view s) {
    if (s == "ml") return DecoderKind::ml;
    if (s == "me") return DecoderKind::me;
    if (s == "oracle") return DecoderKind::oracle;
    return std::nullopt;
}

DecodeResult pick_class(std::vector<double> log_probs, std::size_t logical_rows, DecodeMethod method) {
    if (log_probs.empty()) throw std::invalid_argument("pick_class: no classes");
    double best = -std::numeric_limits<double>::infinity();
    for (double v : log_probs) best = std::max(best, v);
    std::size_t chosen = 0;
    for (std::size_t a = 0; a < log_probs.size(); ++a) {
        if (log_probs[a] >= best - kTieTolerance) {
            chosen = a;
            break;
        }
    }
    DecodeResult r;
    r.alpha = alpha_bits(logical_rows, chosen);
    r.log_probs = std::move(log_probs);
    r.method = method;
    return r;
}

std::vector<BitVector> class_hypotheses(const EEGMatrices &m, const BitVector &sigma, const SymplecticVector &base) {
    check_sigma(m, sigma);
    const std::size_t classes = class_count(m);
    BitVector e0 = embed_output(m, base.n() ? base : SymplecticVector(m.params.n0), sigma);
    std::vector<BitVector> out;
    out.reserve(classes);
    for (std::size_t a = 0; a < classes; ++a) {
        BitVector e = e0;
        for (std::size_t j = 0; j < m.L.rows(); ++j) {
            if ((a >> j) & 1) e ^= m.L.row(j);
        }
        out.push_back(std::move(e));
    }
    return out;
}

DecodeResult ml_decode(const EEGMatrices &m, const ErrorModel &model, const BitVector &sigma,
                       const SymplecticVector &base, const EnumerationOptions &opt) {
    RowSpace space(m.G);
    IsingSystem s = coupled_system(m.G.select_rows(space.independent_rows()), model);
    std::vector<BitVector> signs;
    for (const auto &e : class_hypotheses(m, sigma, base)) signs.push_back(s.signs_for(e));
    std::vector<double> values = log_partition_functions(s.theta, s.K, signs, opt);
    const double norm = log_normalizer(model, opt);
    for (double &v : values) v -= norm;
    return pick_class(std::move(values), m.L.rows(), DecodeMethod::ml_full);
}

DecodeResult ml_decode(const EEGMatrices &m, const ErrorModel &model, const BitVector &sigma,
                       const EnumerationOptions &opt) {
    return ml_decode(m, model, sigma, SymplecticVector(m.params.n0), opt);
}

namespace {

// Sign patterns base·lineage + alpha·(logical block) for every alpha.
std::vector<BitVector> reduced_signs(const ReducedSystem &r, const EEGMatrices &m, const BitVector &sigma,
                                     const SymplecticVector &base) {
    check_sigma(m, sigma);
    if (r.logical_rows() != m.L.rows()) throw std::invalid_argument("reduced system does not match the circuit");
    const std::size_t classes = class_count(m);
    BitVector e = embed_output(m, base.n() ? base : SymplecticVector(m.params.n0), sigma);
    BitVector s0 = r.lineage().left_multiply(e);
    BinaryMatrix lb = r.logical_block();
    std::vector<BitVector> out;
    out.reserve(classes);
    for (std::size_t a = 0; a < classes; ++a) {
        BitVector s = s0;
        if (a) s ^= lb.left_multiply(alpha_bits(lb.rows(), a));
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

DecodeResult ml_decode(const ReducedSystem &r, const EEGMatrices &m, const BitVector &sigma,
                       const SymplecticVector &base, double log_norm, const EnumerationOptions &opt) {
    auto signs = reduced_signs(r, m, sigma, base);
    std::vector<double> K = r.K();
    std::vector<double> values = log_partition_functions(r.gauge_block(), K, signs, opt);
    for (double &v : values) v += r.log_const() - r.log_offset() - log_norm;
    return pick_class(std::move(values), m.L.rows(), DecodeMethod::ml_reduced);
}

DecodeResult me_decode(const ReducedSystem &r, const EEGMatrices &m, const BitVector &sigma,
                       const SymplecticVector &base, double log_norm) {
    if (!r.complete()) throw std::invalid_argument("me_decode needs a fully reduced system");
    auto signs = reduced_signs(r, m, sigma, base);
    std::vector<double> values;
    for (const auto &s : signs) {
        double E = r.log_const() - r.log_offset() - log_norm;
        for (std::size_t b = 0; b < r.bond_count(); ++b) E += s.get(b) ? -r.bonds()[b].K : r.bonds()[b].K;
        values.push_back(E);
    }
    return pick_class(std::move(values), m.L.rows(), DecodeMethod::me);
}

ClassOracle::ClassOracle(const EEGMatrices &m, const ErrorModel &model, std::size_t max_dim) : m_(&m) {
    if (model.N != m.params.N) throw std::invalid_argument("oracle: model size does not match the circuit");
    const std::size_t N = m.params.N;
    auto dist = location_distributions(model);

    std::vector<BitVector> images;
    images.reserve(2 * N);
    for (std::size_t c = 0; c < 2 * N; ++c) {
        BitVector e(2 * N);
        e.set(c);
        images.push_back(key(e));
    }
    BinaryMatrix all = BinaryMatrix::from_rows(images, images.front().size());
    RowSpace span(all);
    basis_ = RowSpace(all.select_rows(span.independent_rows()));
    const std::size_t d = basis_.rank();
    if (d > max_dim) throw CapExceeded(d, max_dim);
    if (2 * N - d != m.params.rank_g) throw std::logic_error("oracle: class map kernel differs from the row space of G");

    std::vector<double> p(std::size_t{1} << d, 0.0), next(p.size());
    p[0] = 1.0;
    for (std::size_t loc = 0; loc < N; ++loc) {
        const std::uint64_t ix = coordinates(images[x_coord(loc)]);
        const std::uint64_t iz = coordinates(images[z_coord(N, loc)]);
        const std::uint64_t shift[4] = {0, ix, iz, ix ^ iz};
        std::fill(next.begin(), next.end(), 0.0);
        for (int o = 0; o < 4; ++o) {
            const double w = dist[loc][o];
            if (w == 0.0) continue;
            for (std::size_t v = 0; v < p.size(); ++v) next[v ^ shift[o]] += w * p[v];
        }
        std::swap(p, next);
    }
    log_p_.resize(p.size());
    for (std::size_t v = 0; v < p.size(); ++v) log_p_[v] = std::log(p[v]);
}

// (alpha | sigma | output base) of the class of e.
BitVector ClassOracle::key(const BitVector &e) const {
    OutputError out = propagate_to_output(*m_, e);
    BitVector flat = out.e0.flat();
    BitVector base = m_->output.span.reduce(flat);
    auto combo = m_->output.span.solve(flat ^ base);
    if (!combo) throw std::logic_error("oracle: output frame is inconsistent");
    BitVector alpha = combo->slice(m_->output.stabilizers.rows(), m_->output.logicals.rows());
    return alpha.concat(out.sigma).concat(base);
}

std::uint64_t ClassOracle::coordinates(const BitVector &k) const {
    auto c = basis_.solve(k);
    if (!c) throw std::logic_error("oracle: class key outside the image");
    return c->to_uint();
}

double ClassOracle::log_prob(const BitVector &e) const { return log_p_[coordinates(key(e))]; }

DecodeResult ClassOracle::decode(const BitVector &sigma, const SymplecticVector &base) const {
    std::vector<double> values;
    for (const auto &e : class_hypotheses(*m_, sigma, base)) values.push_back(log_prob(e));
    return pick_class(std::move(values), m_->L.rows(), DecodeMethod::oracle);
}

DecodeResult exhaustive_oracle(const EEGMatrices &m, const ErrorModel &model, const BitVector &sigma,
                               const SymplecticVector &base) {
    return ClassOracle(m, model).decode(sigma, base);
}

ReducedSystem reduce_circuit(const EEGMatrices &m, const ErrorModel &model, Reduction r, std::size_t final_cap,
                             const ReduceOptions &opt) {
    ReducedSystem s = ReducedSystem::from_circuit(m, model, opt);
    switch (r) {
        case Reduction::none: return s;
        case Reduction::w2: return reduce_up_to_weight(std::move(s), 2);
        case Reduction::w3: return reduce_up_to_weight(std::move(s), 3);
        case Reduction::full: return full_reduce(std::move(s), final_cap);
        case Reduction::complete: return complete_reduce(std::move(s), final_cap);
    }
    return s;
}

Decoder::Decoder(const EEGMatrices &m, const ErrorModel &model, const DecoderSpec &spec)
    : m_(&m), model_(&model), spec_(spec) {
    if (model.N != m.params.N) throw std::invalid_argument("decoder: model size does not match the circuit");
    class_count(m);
    if (spec.kind == DecoderKind::oracle) {
        oracle_ = std::make_shared<ClassOracle>(m, model);
        return;
    }
    log_norm_ = log_normalizer(model, spec.enumeration);
    if (spec.kind == DecoderKind::me && spec.reduction != Reduction::full && spec.reduction != Reduction::complete) {
        throw std::invalid_argument("me decoding needs --reduction full or complete");
    }
    if (spec.reduction != Reduction::none) {
        ReduceOptions opt;
        opt.track_dual = false;
        reduced_ = reduce_circuit(m, model, spec.reduction, spec.final_cap, opt);
        if (spec.kind == DecoderKind::me && !reduced_->complete()) {
            throw std::invalid_argument("me decoding needs a fully reduced system; " +
                                        std::to_string(reduced_->gauge_rows()) + " gauge rows remain");
        }
        if (spec.kind == DecoderKind::ml && reduced_->gauge_rows() > spec.enumeration.max_spins) {
            throw CapExceeded(reduced_->gauge_rows(), spec.enumeration.max_spins);
        }
    }
}

DecodeResult Decoder::decode(const BitVector &sigma, const SymplecticVector &base) const {
    if (oracle_) return oracle_->decode(sigma, base);
    if (spec_.kind == DecoderKind::me) return me_decode(*reduced_, *m_, sigma, base, log_norm_);
    if (reduced_) return ml_decode(*reduced_, *m_, sigma, base, log_norm_, spec_.enumeration);
    return ml_decode(*m_, *model_, sigma, base, spec_.enumeration);
}

DecodeResult Decoder::decode(const BitVector &sigma) const { return decode(sigma, SymplecticVector(m_->params.n0)); }

double SimReport::failure_rate() const {
    if (trials == 0) return std::numeric_limits<double>::quiet_NaN();
    return static_cast<double>(failures) / static_cast<double>(trials);
}

SimReport monte_carlo(const EEGMatrices &m, const ErrorModel &model, const Decoder &decoder, std::size_t trials,
                      std::uint64_t seed, bool keep_decisions, std::size_t workers) {
    constexpr std::size_t kChunk = 1024;
    auto start = std::chrono::steady_clock::now();
    ErrorSampler sampler(model);
    SimReport rep;
    rep.trials = trials;
    rep.seed = seed;
    rep.decoder = std::string(to_string(decoder.spec().kind));
    rep.reduction = decoder.spec().kind == DecoderKind::oracle ? "none" : std::string(to_string(decoder.spec().reduction));
    rep.model = model.descriptor;
    if (keep_decisions) rep.decisions.assign(trials, 0);

    const std::size_t chunks = (trials + kChunk - 1) / kChunk;
    std::vector<std::size_t> failures(chunks, 0);
    if (workers == 0) workers = 1;
    workers = std::max<std::size_t>(1, std::min(workers, chunks));
    auto run = [&](std::size_t worker) {
        std::unordered_map<std::string, std::uint64_t> memo;
        for (std::size_t c = worker; c < chunks; c += workers) {
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
            std::mt19937_64 rng(seq);
            const std::size_t end = std::min(trials, (c + 1) * kChunk);
            for (std::size_t t = c * kChunk; t < end; ++t) {
                BitVector e = sampler.sample(rng);
                OutputError out = propagate_to_output(m, e);
                SymplecticVector base = canonical_base(m, out.e0);
                std::string k = out.sigma.to_string() + '|' + base.flat().to_string();
                auto it = memo.find(k);
                if (it == memo.end()) it = memo.emplace(k, decoder.decode(out.sigma, base).chosen()).first;
                const std::uint64_t truth = class_of(m, e).to_uint();
                if (it->second != truth) ++failures[c];
                if (keep_decisions) rep.decisions[t] = it->second;
            }
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
        for (auto &th : pool) th.join();
    }
    for (std::size_t f : failures) rep.failures += f;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace eegdec
