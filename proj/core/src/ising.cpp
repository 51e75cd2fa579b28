#include "eegdec/ising.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <string>
#include <thread>

#include "eegdec/eeg.hpp"

namespace eegdec {

namespace {

using Word = std::uint64_t;

// Running log-sum-exp.
struct LogSum {
    double ref = -INFINITY;
    double sum = 0.0;

    void add(double x) {
        if (x > ref) {
            sum = sum * std::exp(ref - x) + 1.0;
            ref = x;
        } else {
            sum += std::exp(x - ref);
        }
    }
    void merge(const LogSum &o) {
        if (o.sum == 0.0) return;
        if (sum == 0.0) {
            *this = o;
        } else if (o.ref > ref) {
            sum = sum * std::exp(ref - o.ref) + o.sum;
            ref = o.ref;
        } else {
            sum += o.sum * std::exp(o.ref - ref);
        }
    }
    double value() const { return ref + std::log(sum); }
};

// Problem prepared for enumeration: bonds with all-zero columns are folded
// into a per-pattern constant, the rest are packed W words per spin row.
struct Problem {
    std::size_t n = 0;
    std::size_t W = 0;
    std::vector<Word> rows;  // n * W
    std::vector<double> kabs;
    std::vector<std::vector<Word>> neg;  // per pattern, W words
    std::vector<double> constant;        // per pattern
    // level decomposition of |K|
    bool leveled = false;
    std::vector<double> level_value;
    std::vector<std::vector<Word>> level_mask;
    std::vector<std::size_t> level_stride;
    std::size_t hist_size = 0;

    const Word *row(std::size_t i) const { return rows.data() + i * W; }
};

constexpr std::size_t kMaxLevels = 4;
constexpr std::size_t kMaxHistogram = std::size_t{1} << 20;

Problem prepare(const BinaryMatrix &theta, std::span<const double> K, std::span<const BitVector> signs) {
    if (theta.cols() != K.size()) throw std::invalid_argument("partition function: K length differs from bond count");
    Problem p;
    p.n = theta.rows();
    std::vector<std::size_t> active;
    std::vector<bool> zero_col(K.size(), true);
    for (std::size_t r = 0; r < theta.rows(); ++r) {
        for (std::size_t b : theta.row(r).support()) zero_col[b] = false;
    }
    for (std::size_t b = 0; b < K.size(); ++b) {
        if (!std::isfinite(K[b])) throw std::invalid_argument("partition function: non-finite coefficient");
        if (!zero_col[b] && K[b] != 0.0) active.push_back(b);
    }
    const std::size_t m = active.size();
    p.W = std::max<std::size_t>(1, (m + 63) / 64);
    p.rows.assign(p.n * p.W, 0);
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t b = active[j];
        p.kabs.push_back(std::abs(K[b]));
        for (std::size_t r = 0; r < p.n; ++r) {
            if (theta.get(r, b)) p.rows[r * p.W + j / 64] |= Word{1} << (j % 64);
        }
    }
    for (const auto &s : signs) {
        if (s.size() != K.size()) throw std::invalid_argument("partition function: sign vector length mismatch");
        std::vector<Word> neg(p.W, 0);
        for (std::size_t j = 0; j < m; ++j) {
            std::size_t b = active[j];
            if ((K[b] < 0) != s.get(b)) neg[j / 64] |= Word{1} << (j % 64);
        }
        double c = 0;
        for (std::size_t b = 0; b < K.size(); ++b) {
            if (zero_col[b]) c += s.get(b) ? -K[b] : K[b];
        }
        p.neg.push_back(std::move(neg));
        p.constant.push_back(c);
    }

    std::vector<double> levels;
    for (double k : p.kabs) {
        if (std::find(levels.begin(), levels.end(), k) == levels.end()) levels.push_back(k);
        if (levels.size() > kMaxLevels) break;
    }
    if (levels.size() <= kMaxLevels) {
        std::size_t size = 1;
        std::vector<std::size_t> counts(levels.size(), 0);
        for (double k : p.kabs) ++counts[std::find(levels.begin(), levels.end(), k) - levels.begin()];
        bool fits = true;
        for (std::size_t l = 0; l < levels.size(); ++l) {
            p.level_stride.push_back(size);
            size *= counts[l] + 1;
            if (size > kMaxHistogram) fits = false;
        }
        if (fits) {
            p.leveled = true;
            p.level_value = levels;
            p.hist_size = size;
            p.level_mask.assign(levels.size(), std::vector<Word>(p.W, 0));
            for (std::size_t j = 0; j < m; ++j) {
                std::size_t l = std::find(levels.begin(), levels.end(), p.kabs[j]) - levels.begin();
                p.level_mask[l][j / 64] |= Word{1} << (j % 64);
            }
        }
    }
    return p;
}

double energy_of(const Problem &p, const Word *R, const std::vector<Word> &neg) {
    double E = 0;
    for (std::size_t j = 0; j < p.kabs.size(); ++j) {
        bool flipped = ((R[j / 64] ^ neg[j / 64]) >> (j % 64)) & 1;
        E += flipped ? -p.kabs[j] : p.kabs[j];
    }
    return E;
}

// Spin configurations are split into blocks by their top `split` spins; the
// low spins of each block are visited in Gray-code order.
struct Blocking {
    std::size_t split = 0;
    std::size_t low = 0;
    std::size_t blocks() const { return std::size_t{1} << split; }
};

Blocking make_blocking(std::size_t n) {
    Blocking b;
    b.split = n > 12 ? std::min<std::size_t>(8, n - 12) : 0;
    b.low = n - b.split;
    return b;
}

void block_start(const Problem &p, const Blocking &bl, std::size_t block, std::vector<Word> &R) {
    std::fill(R.begin(), R.end(), 0);
    for (std::size_t t = 0; t < bl.split; ++t) {
        if ((block >> t) & 1) {
            const Word *row = p.row(bl.low + t);
            for (std::size_t w = 0; w < p.W; ++w) R[w] ^= row[w];
        }
    }
}

template <typename Fn>
void run_blocks(std::size_t blocks, std::size_t workers, Fn &&fn) {
    workers = std::max<std::size_t>(1, std::min(workers, blocks));
    if (workers == 1) {
        for (std::size_t b = 0; b < blocks; ++b) fn(b, 0);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t b = next++; b < blocks; b = next++) fn(b, t);
        });
    }
    for (auto &th : pool) th.join();
}

std::vector<double> enumerate_leveled(const Problem &p, std::size_t workers) {
    const std::size_t P = p.neg.size();
    const std::size_t L = p.level_value.size();
    const Blocking bl = make_blocking(p.n);
    workers = std::max<std::size_t>(1, std::min(workers, bl.blocks()));
    std::vector<std::vector<std::uint64_t>> hist(workers, std::vector<std::uint64_t>(P * p.hist_size, 0));
    run_blocks(bl.blocks(), workers, [&](std::size_t block, std::size_t worker) {
        std::vector<Word> R(p.W);
        block_start(p, bl, block, R);
        auto &h = hist[worker];
        const std::size_t steps = std::size_t{1} << bl.low;
        if (p.W == 1 && L == 1) {
            Word r = R[0];
            const Word mask = p.level_mask[0][0];
            for (std::size_t t = 0;;) {
                for (std::size_t q = 0; q < P; ++q) ++h[q * p.hist_size + std::popcount((r ^ p.neg[q][0]) & mask)];
                if (++t == steps) break;
                r ^= p.rows[std::countr_zero(t)];
            }
            return;
        }
        for (std::size_t t = 0;;) {
            for (std::size_t q = 0; q < P; ++q) {
                std::size_t idx = 0;
                for (std::size_t l = 0; l < L; ++l) {
                    std::size_t c = 0;
                    for (std::size_t w = 0; w < p.W; ++w) c += std::popcount((R[w] ^ p.neg[q][w]) & p.level_mask[l][w]);
                    idx += c * p.level_stride[l];
                }
                ++h[q * p.hist_size + idx];
            }
            if (++t == steps) break;
            const Word *row = p.row(std::countr_zero(t));
            for (std::size_t w = 0; w < p.W; ++w) R[w] ^= row[w];
        }
    });
    std::vector<std::size_t> level_count(L, 0);
    for (std::size_t l = 0; l < L; ++l) {
        for (std::size_t w = 0; w < p.W; ++w) level_count[l] += std::popcount(p.level_mask[l][w]);
    }
    std::vector<double> out(P);
    for (std::size_t q = 0; q < P; ++q) {
        LogSum acc;
        for (std::size_t idx = 0; idx < p.hist_size; ++idx) {
            std::uint64_t count = 0;
            for (std::size_t w = 0; w < workers; ++w) count += hist[w][q * p.hist_size + idx];
            if (count == 0) continue;
            double E = 0;
            std::size_t rest = idx;
            for (std::size_t l = L; l-- > 0;) {
                std::size_t flipped = rest / p.level_stride[l];
                rest %= p.level_stride[l];
                E += p.level_value[l] * (static_cast<double>(level_count[l]) - 2.0 * static_cast<double>(flipped));
            }
            acc.add(E + std::log(static_cast<double>(count)));
        }
        out[q] = acc.value() + p.constant[q];
    }
    return out;
}

std::vector<double> enumerate_general(const Problem &p, std::size_t workers) {
    const std::size_t P = p.neg.size();
    const Blocking bl = make_blocking(p.n);
    std::vector<std::vector<LogSum>> partial(bl.blocks(), std::vector<LogSum>(P));
    // per-row bond lists for incremental updates
    std::vector<std::vector<std::size_t>> support(p.n);
    for (std::size_t r = 0; r < p.n; ++r) {
        for (std::size_t j = 0; j < p.kabs.size(); ++j) {
            if ((p.row(r)[j / 64] >> (j % 64)) & 1) support[r].push_back(j);
        }
    }
    run_blocks(bl.blocks(), workers, [&](std::size_t block, std::size_t) {
        std::vector<Word> R(p.W);
        block_start(p, bl, block, R);
        std::vector<double> E(P);
        for (std::size_t q = 0; q < P; ++q) E[q] = energy_of(p, R.data(), p.neg[q]);
        auto &acc = partial[block];
        const std::size_t steps = std::size_t{1} << bl.low;
        for (std::size_t t = 0;;) {
            for (std::size_t q = 0; q < P; ++q) acc[q].add(E[q]);
            if (++t == steps) break;
            std::size_t spin = std::countr_zero(t);
            if ((t & 1023) == 0) {
                const Word *row = p.row(spin);
                for (std::size_t w = 0; w < p.W; ++w) R[w] ^= row[w];
                for (std::size_t q = 0; q < P; ++q) E[q] = energy_of(p, R.data(), p.neg[q]);
                continue;
            }
            for (std::size_t j : support[spin]) {
                Word bit = Word{1} << (j % 64);
                for (std::size_t q = 0; q < P; ++q) {
                    bool flipped = (R[j / 64] ^ p.neg[q][j / 64]) & bit;
                    E[q] += flipped ? 2.0 * p.kabs[j] : -2.0 * p.kabs[j];
                }
                R[j / 64] ^= bit;
            }
        }
    });
    std::vector<double> out(P);
    for (std::size_t q = 0; q < P; ++q) {
        LogSum acc;
        for (std::size_t b = 0; b < bl.blocks(); ++b) acc.merge(partial[b][q]);
        out[q] = acc.value() + p.constant[q];
    }
    return out;
}

}  // namespace

CapExceeded::CapExceeded(std::size_t rows, std::size_t cap)
    : std::runtime_error("exact enumeration refused: " + std::to_string(rows) + " spin rows exceed the cap of " +
                         std::to_string(cap)),
      rows_(rows),
      cap_(cap) {}

std::size_t default_workers() {
    if (const char *env = std::getenv("EEGDEC_WORKERS")) {
        char *end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

BitVector IsingSystem::signs_for(const BitVector &e) const { return lineage.left_multiply(e); }

namespace {

std::vector<double> enumerate_connected(const BinaryMatrix &theta, std::span<const double> K,
                                        std::span<const BitVector> signs, const EnumerationOptions &opt) {
    if (theta.rows() > opt.max_spins) throw CapExceeded(theta.rows(), opt.max_spins);
    if (theta.rows() > 62) throw CapExceeded(theta.rows(), 62);
    Problem p = prepare(theta, K, signs);
    std::size_t workers = opt.workers ? opt.workers : default_workers();
    if (p.leveled) return enumerate_leveled(p, workers);
    return enumerate_general(p, workers);
}

}  // namespace

std::vector<double> log_partition_functions(const BinaryMatrix &theta, std::span<const double> K,
                                            std::span<const BitVector> signs, const EnumerationOptions &opt) {
    if (theta.cols() != K.size()) throw std::invalid_argument("partition function: K length differs from bond count");
    if (signs.empty()) return {};
    const std::size_t n = theta.rows();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    BinaryMatrix cols = theta.transposed();
    for (std::size_t b = 0; b < K.size(); ++b) {
        auto sup = cols.row(b).support();
        for (std::size_t i = 1; i < sup.size(); ++i) parent[find(sup[i])] = find(sup[0]);
    }
    std::vector<std::size_t> comp_of(n);
    std::vector<std::vector<std::size_t>> comp_rows;
    std::vector<std::size_t> index(n, static_cast<std::size_t>(-1));
    for (std::size_t r = 0; r < n; ++r) {
        std::size_t root = find(r);
        if (index[root] == static_cast<std::size_t>(-1)) {
            index[root] = comp_rows.size();
            comp_rows.emplace_back();
        }
        comp_of[r] = index[root];
        comp_rows[index[root]].push_back(r);
    }
    if (comp_rows.size() <= 1) return enumerate_connected(theta, K, signs, opt);

    // Independent groups of spins: Z factorizes.
    std::vector<std::vector<std::size_t>> comp_bonds(comp_rows.size());
    std::vector<double> out(signs.size(), 0.0);
    for (std::size_t b = 0; b < K.size(); ++b) {
        if (cols.row(b).any()) {
            comp_bonds[comp_of[cols.row(b).first_set()]].push_back(b);
        } else {
            for (std::size_t q = 0; q < signs.size(); ++q) out[q] += signs[q].get(b) ? -K[b] : K[b];
        }
    }
    for (std::size_t c = 0; c < comp_rows.size(); ++c) {
        const auto &rs = comp_rows[c];
        const auto &bs = comp_bonds[c];
        BinaryMatrix sub(rs.size(), bs.size());
        std::vector<double> subK;
        for (std::size_t j = 0; j < bs.size(); ++j) {
            subK.push_back(K[bs[j]]);
            for (std::size_t i = 0; i < rs.size(); ++i) {
                if (theta.get(rs[i], bs[j])) sub.set(i, j);
            }
        }
        std::vector<BitVector> subsigns;
        for (const auto &sg : signs) {
            BitVector v(bs.size());
            for (std::size_t j = 0; j < bs.size(); ++j) v.set(j, sg.get(bs[j]));
            subsigns.push_back(std::move(v));
        }
        auto part = enumerate_connected(sub, subK, subsigns, opt);
        for (std::size_t q = 0; q < signs.size(); ++q) out[q] += part[q];
    }
    return out;
}

double log_partition_function(const BinaryMatrix &theta, std::span<const double> K, const BitVector &signs,
                              const EnumerationOptions &opt) {
    return log_partition_functions(theta, K, std::span<const BitVector>(&signs, 1), opt).front();
}

double partition_function(const IsingSystem &s, const BitVector &signs, const EnumerationOptions &opt) {
    return log_partition_function(s.theta, s.K, signs, opt) + s.log_const;
}

IsingSystem bernoulli_to_ising(const BernoulliTable &t) {
    if (t.m > 16) throw std::invalid_argument("bernoulli_to_ising: at most 16 variables");
    const std::size_t size = std::size_t{1} << t.m;
    if (t.p.size() != size) throw std::invalid_argument("bernoulli_to_ising: table size must be 2^m");
    std::vector<double> f(size);
    for (std::size_t x = 0; x < size; ++x) {
        if (!(t.p[x] > 0.0)) throw std::invalid_argument("bernoulli_to_ising: probabilities must be positive");
        f[x] = std::log(t.p[x]);
    }
    // Walsh-Hadamard transform: f[J] <- Σ_x (-1)^{x·J} ln p_x
    for (std::size_t h = 1; h < size; h <<= 1) {
        for (std::size_t i = 0; i < size; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                double a = f[j], b = f[j + h];
                f[j] = a + b;
                f[j + h] = a - b;
            }
        }
    }
    const double scale = 1.0 / static_cast<double>(size);
    IsingSystem s;
    s.theta = BinaryMatrix(t.m, size - 1);
    s.log_const = f[0] * scale;
    for (std::size_t J = 1; J < size; ++J) {
        for (std::size_t i = 0; i < t.m; ++i) {
            if ((J >> i) & 1) s.theta.set(i, J - 1);
        }
        s.K.push_back(f[J] * scale);
    }
    s.lineage = s.theta;
    return s;
}

double log_weight(const IsingSystem &s, const BitVector &x) {
    double E = s.log_const;
    BitVector flips = s.theta.left_multiply(x);
    for (std::size_t b = 0; b < s.K.size(); ++b) E += flips.get(b) ? -s.K[b] : s.K[b];
    return E;
}

double log_normalizer(const ErrorModel &model, const EnumerationOptions &opt) {
    const std::size_t n = 2 * model.N;
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (const auto &col : model.columns) {
        auto s = col.support();
        for (std::size_t i = 1; i < s.size(); ++i) parent[find(s[i])] = find(s[0]);
    }
    std::vector<std::vector<std::size_t>> coords(n), bonds(n);
    for (std::size_t c = 0; c < n; ++c) coords[find(c)].push_back(c);
    for (std::size_t b = 0; b < model.K.size(); ++b) {
        auto s = model.columns[b].support();
        if (s.empty()) continue;
        bonds[find(s.front())].push_back(b);
    }
    double total = 0;
    for (const auto &col : model.columns) {
        if (col.none()) throw std::invalid_argument("log_normalizer: empty model column");
    }
    for (std::size_t root = 0; root < n; ++root) {
        if (coords[root].empty()) continue;
        const auto &cs = coords[root];
        const auto &bs = bonds[root];
        BinaryMatrix theta(cs.size(), bs.size());
        std::vector<double> K;
        for (std::size_t j = 0; j < bs.size(); ++j) {
            K.push_back(model.K[bs[j]]);
            for (std::size_t i = 0; i < cs.size(); ++i) {
                if (model.columns[bs[j]].get(cs[i])) theta.set(i, j);
            }
        }
        EnumerationOptions o = opt;
        o.max_spins = std::max<std::size_t>(opt.max_spins, 30);
        total += log_partition_function(theta, K, BitVector(bs.size()), o);
    }
    return total;
}

double log_prob_of_error(const ErrorModel &model, const BitVector &e, double log_norm) {
    return model.energy(e) - log_norm;
}

double prob_of_error(const ErrorModel &model, const BitVector &e) {
    return std::exp(log_prob_of_error(model, e, log_normalizer(model)));
}

IsingSystem coupled_system(const BinaryMatrix &rows, const ErrorModel &model) {
    if (rows.cols() != 2 * model.N) throw std::invalid_argument("coupled_system: row length must be 2N");
    IsingSystem s;
    s.theta = BinaryMatrix(rows.rows(), model.bonds());
    for (std::size_t b = 0; b < model.bonds(); ++b) {
        BitVector col = rows.right_multiply(model.columns[b]);
        for (std::size_t r : col.support()) s.theta.set(r, b);
    }
    s.K = model.K;
    s.lineage = model.theta();
    return s;
}

double class_log_weight(const BinaryMatrix &G, const ErrorModel &model, const BitVector &e,
                        const EnumerationOptions &opt) {
    RowSpace space(G);
    IsingSystem s = coupled_system(G.select_rows(space.independent_rows()), model);
    return partition_function(s, s.signs_for(e), opt);
}

double class_probability(const BinaryMatrix &G, const ErrorModel &model, const BitVector &e,
                         const EnumerationOptions &opt) {
    return class_log_weight(G, model, e, opt) - log_normalizer(model, opt);
}

double class_probability(const EEGMatrices &m, const ErrorModel &model, const BitVector &e,
                         const EnumerationOptions &opt) {
    return class_probability(m.G, model, e, opt);
}

}  // namespace eegdec
