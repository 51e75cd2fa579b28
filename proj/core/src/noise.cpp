#include "eegdec/noise.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace eegdec {

namespace {

void check_probability(double p, const char *what) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie strictly between 0 and 1");
    }
}

double parse_double(std::string_view s) {
    std::string tmp(s);
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(tmp, &used);
    } catch (const std::exception &) {
        throw std::invalid_argument("bad number '" + tmp + "'");
    }
    if (used != tmp.size()) throw std::invalid_argument("bad number '" + tmp + "'");
    return v;
}

}  // namespace

BinaryMatrix ErrorModel::theta() const { return BinaryMatrix::from_columns(columns, 2 * N); }

double ErrorModel::energy(const BitVector &e) const {
    double E = 0;
    for (std::size_t b = 0; b < K.size(); ++b) E += columns[b].dot(e) ? -K[b] : K[b];
    return E;
}

double half_llr(double p) { return 0.5 * std::log((1.0 - p) / p); }

ErrorModel iid_xz(const std::vector<double> &pX, const std::vector<double> &pZ) {
    if (pX.size() != pZ.size()) throw std::invalid_argument("iid_xz: pX and pZ lengths differ");
    ErrorModel m;
    m.N = pX.size();
    m.form = ModelForm::iid_xz;
    m.columns.reserve(2 * m.N);
    for (std::size_t c = 0; c < 2 * m.N; ++c) {
        double p = c < m.N ? pX[c] : pZ[c - m.N];
        check_probability(p, "iid_xz error probability");
        BitVector col(2 * m.N);
        col.set(c);
        m.columns.push_back(std::move(col));
        m.K.push_back(half_llr(p));
    }
    return m;
}

ErrorModel iid_xz(std::size_t N, double pX, double pZ) {
    check_probability(pX, "pX");
    check_probability(pZ, "pZ");
    ErrorModel m = iid_xz(std::vector<double>(N, pX), std::vector<double>(N, pZ));
    std::ostringstream d;
    d << "iid:" << pX;
    if (pZ != pX) d << ',' << pZ;
    m.descriptor = d.str();
    return m;
}

ErrorModel depolarizing(const std::vector<double> &p) {
    ErrorModel m;
    m.N = p.size();
    m.form = ModelForm::depolarizing;
    for (std::size_t i = 0; i < m.N; ++i) {
        check_probability(p[i], "depolarizing error probability");
        double K = 0.25 * std::log(3.0 * (1.0 - p[i]) / p[i]);
        BitVector x(2 * m.N), z(2 * m.N);
        x.set(i);
        z.set(m.N + i);
        m.columns.push_back(x);
        m.columns.push_back(z);
        m.columns.push_back(x ^ z);
        m.K.insert(m.K.end(), {K, K, K});
    }
    return m;
}

ErrorModel depolarizing(std::size_t N, double p) {
    check_probability(p, "depolarizing error probability");
    ErrorModel m = depolarizing(std::vector<double>(N, p));
    std::ostringstream d;
    d << "depol:" << p;
    m.descriptor = d.str();
    return m;
}

ErrorModel add_correlation(const ErrorModel &model, const std::vector<std::size_t> &support, double K) {
    if (support.empty()) throw std::invalid_argument("add_correlation: empty support");
    if (!std::isfinite(K)) throw std::invalid_argument("add_correlation: coefficient must be finite");
    ErrorModel m = model;
    m.columns.push_back(BitVector::from_support(2 * m.N, support));
    m.K.push_back(K);
    m.form = ModelForm::custom;
    if (!m.descriptor.empty()) m.descriptor += "+corr";
    return m;
}

bool is_product_form(const ErrorModel &model) {
    for (const auto &col : model.columns) {
        auto s = col.support();
        if (s.empty()) continue;
        std::size_t loc = s.front() % model.N;
        for (std::size_t c : s) {
            if (c % model.N != loc) return false;
        }
    }
    return true;
}

std::vector<LocationDistribution> location_distributions(const ErrorModel &model) {
    if (!is_product_form(model)) throw std::invalid_argument("model is not a product over locations");
    const std::size_t N = model.N;
    std::vector<std::array<double, 4>> energy(N, {0, 0, 0, 0});
    for (std::size_t b = 0; b < model.K.size(); ++b) {
        auto s = model.columns[b].support();
        if (s.empty()) continue;
        std::size_t loc = s.front() % N;
        bool cx = model.columns[b].get(loc), cz = model.columns[b].get(N + loc);
        for (int o = 0; o < 4; ++o) {
            bool u = o & 1, v = o & 2;
            bool flip = (u && cx) != (v && cz);
            energy[loc][o] += flip ? -model.K[b] : model.K[b];
        }
    }
    std::vector<LocationDistribution> out(N);
    for (std::size_t i = 0; i < N; ++i) {
        double top = std::max(std::max(energy[i][0], energy[i][1]), std::max(energy[i][2], energy[i][3]));
        double total = 0;
        for (int o = 0; o < 4; ++o) total += out[i][o] = std::exp(energy[i][o] - top);
        for (int o = 0; o < 4; ++o) out[i][o] /= total;
    }
    return out;
}

ErrorSampler::ErrorSampler(const ErrorModel &model) : N_(model.N) {
    for (const auto &d : location_distributions(model)) cumulative_.push_back({d[0], d[0] + d[1], d[0] + d[1] + d[2]});
}

BitVector ErrorSampler::sample(std::mt19937_64 &rng) const {
    BitVector e(2 * N_);
    for (std::size_t i = 0; i < N_; ++i) {
        // 53 random bits -> uniform double in [0, 1)
        double r = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const auto &c = cumulative_[i];
        if (r < c[0]) continue;
        if (r < c[1]) {
            e.set(i);
        } else if (r < c[2]) {
            e.set(N_ + i);
        } else {
            e.set(i);
            e.set(N_ + i);
        }
    }
    return e;
}

BitVector sample_error(const ErrorModel &model, std::mt19937_64 &rng) { return ErrorSampler(model).sample(rng); }

ErrorModel read_model_file(std::istream &in, std::size_t N) {
    ErrorModel m;
    m.N = N;
    m.form = ModelForm::custom;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        if (auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
        std::istringstream ls(raw);
        std::string tag, value, coords;
        if (!(ls >> tag)) continue;
        auto fail = [&](const std::string &msg) {
            throw std::invalid_argument("model file line " + std::to_string(lineno) + ": " + msg);
        };
        if (tag != "K" || !(ls >> value >> coords)) fail("expected 'K <value> <loc>:<X|Z>[,...]'");
        std::string extra;
        if (ls >> extra) fail("unexpected trailing text");
        double K = 0;
        try {
            K = parse_double(value);
        } catch (const std::exception &e) {
            fail(e.what());
        }
        if (!std::isfinite(K)) fail("coefficient must be finite");
        BitVector col(2 * N);
        std::size_t start = 0;
        while (start < coords.size()) {
            std::size_t end = coords.find(',', start);
            if (end == std::string::npos) end = coords.size();
            std::string item = coords.substr(start, end - start);
            auto colon = item.find(':');
            std::size_t loc = 0;
            if (colon == std::string::npos || colon + 2 != item.size()) fail("bad coordinate '" + item + "'");
            auto [ptr, ec] = std::from_chars(item.data(), item.data() + colon, loc);
            if (ec != std::errc() || ptr != item.data() + colon || loc < 1 || loc > N) {
                fail("location out of range in '" + item + "'");
            }
            char p = item[colon + 1];
            if (p != 'X' && p != 'Z') fail("coordinate must end in X or Z");
            col.flip(p == 'X' ? loc - 1 : N + loc - 1);
            start = end + 1;
        }
        if (col.none()) fail("empty support");
        m.columns.push_back(std::move(col));
        m.K.push_back(K);
    }
    return m;
}

void write_model_file(std::ostream &out, const ErrorModel &model) {
    out.precision(17);
    for (std::size_t b = 0; b < model.K.size(); ++b) {
        out << "K " << model.K[b] << ' ';
        bool first = true;
        for (std::size_t c : model.columns[b].support()) {
            if (!first) out << ',';
            first = false;
            out << (c % model.N) + 1 << ':' << (c < model.N ? 'X' : 'Z');
        }
        out << '\n';
    }
}

ErrorModel parse_model_spec(std::string_view spec, std::size_t N) {
    auto colon = spec.find(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("model spec must look like iid:<p>, depol:<p> or file:<path>");
    std::string_view kind = spec.substr(0, colon), arg = spec.substr(colon + 1);
    if (kind == "iid") return iid_xz(N, parse_double(arg), parse_double(arg));
    if (kind == "depol") return depolarizing(N, parse_double(arg));
    if (kind == "file") {
        std::ifstream in{std::string(arg)};
        if (!in) throw std::invalid_argument("cannot open model file '" + std::string(arg) + "'");
        ErrorModel m = read_model_file(in, N);
        m.descriptor = std::string(spec);
        return m;
    }
    throw std::invalid_argument("unknown model kind '" + std::string(kind) + "'");
}

}  // namespace eegdec
