#include "eegdec/reduce.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "eegdec/eeg.hpp"
#include "eegdec/noise.hpp"

namespace eegdec {

namespace {

constexpr double kLn2 = 0.693147180559945309417;

void fwht(std::vector<double> &f) {
    const std::size_t n = f.size();
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                double a = f[j], b = f[j + h];
                f[j] = a + b;
                f[j + h] = a - b;
            }
        }
    }
}

// Sorted set with elements of odd multiplicity in v.
std::vector<std::uint64_t> odd_elements(std::vector<std::uint64_t> v) {
    std::sort(v.begin(), v.end());
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        if ((j - i) % 2) out.push_back(v[i]);
        i = j;
    }
    return out;
}

std::vector<std::uint64_t> sym_diff(const std::vector<std::uint64_t> &a, const std::vector<std::uint64_t> &b) {
    std::vector<std::uint64_t> out;
    out.reserve(a.size() + b.size());
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

bool contains(const std::vector<std::uint64_t> &row, std::uint64_t id) {
    return std::binary_search(row.begin(), row.end(), id);
}

bool masked_none(const BitVector &v, const BitVector &mask) {
    auto a = v.words();
    auto m = mask.words();
    for (std::size_t w = 0; w < a.size(); ++w) {
        if (a[w] & m[w]) return false;
    }
    return true;
}

}  // namespace

struct ReducedSystem::KeyHash {
    const std::vector<Bond> *bonds;
    const BitVector *mask;
    std::size_t operator()(std::size_t i) const {
        const Bond &b = (*bonds)[i];
        std::uint64_t h = b.column.hash();
        auto lw = b.lineage.words();
        auto mw = mask->words();
        for (std::size_t w = 0; w < lw.size(); ++w) {
            h ^= (lw[w] & mw[w]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
            h *= 0xff51afd7ed558ccdull;
        }
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

struct ReducedSystem::KeyEq {
    const std::vector<Bond> *bonds;
    const BitVector *mask;
    bool operator()(std::size_t i, std::size_t j) const {
        const Bond &a = (*bonds)[i];
        const Bond &b = (*bonds)[j];
        if (a.column != b.column) return false;
        auto la = a.lineage.words();
        auto lb = b.lineage.words();
        auto mw = mask->words();
        for (std::size_t w = 0; w < la.size(); ++w) {
            if ((la[w] ^ lb[w]) & mw[w]) return false;
        }
        return true;
    }
};

WeightCapExceeded::WeightCapExceeded(std::size_t spin, std::size_t weight, std::size_t cap)
    : std::runtime_error("row " + std::to_string(spin) + " has weight " + std::to_string(weight) +
                         ", above the reduction cap of " + std::to_string(cap)),
      weight_(weight) {}

double log_cosh(double x) {
    x = std::abs(x);
    return x + std::log1p(std::exp(-2.0 * x)) - kLn2;
}

ReducedSystem ReducedSystem::from_ising(const IsingSystem &s, std::size_t gauge_rows, BitVector rep_mask,
                                        const ReduceOptions &opt) {
    if (gauge_rows > s.theta.rows()) throw std::invalid_argument("from_ising: gauge block larger than system");
    ReducedSystem r;
    r.opt_ = opt;
    r.gauge_total_ = gauge_rows;
    r.logical_rows_ = s.theta.rows() - gauge_rows;
    r.alive_.assign(gauge_rows, 1);
    r.weight_.assign(s.theta.rows(), 0);
    r.log_const_ = s.log_const;
    BinaryMatrix lineage = s.lineage.rows() || s.lineage.cols() ? s.lineage : BinaryMatrix::identity(s.K.size());
    if (lineage.cols() != s.K.size()) throw std::invalid_argument("from_ising: lineage column count mismatch");
    const std::size_t coords = lineage.rows();
    if (rep_mask.size()) {
        if (rep_mask.size() != coords) throw std::invalid_argument("from_ising: mask length mismatch");
        r.rep_mask_ = std::move(rep_mask);
    } else {
        r.rep_mask_ = BitVector(coords);
        for (std::size_t c = 0; c < coords; ++c) r.rep_mask_.set(c);
    }
    BinaryMatrix theta_t = s.theta.transposed();
    BinaryMatrix lineage_t = lineage.transposed();
    for (std::size_t b = 0; b < s.K.size(); ++b) {
        Bond bond{theta_t.rows() ? theta_t.row(b) : BitVector(s.theta.rows()), lineage_t.row(b), s.K[b], r.next_id_++};
        r.add_weight(bond, +1);
        r.bonds_.push_back(std::move(bond));
    }
    BinaryMatrix gauge(0, s.K.size());
    for (std::size_t i = 0; i < gauge_rows; ++i) gauge.append_row(s.theta.row(i));
    r.log_offset_ = static_cast<double>(gauge_rows - rank(gauge)) * kLn2;
    if (opt.track_dual) r.recompute_dual();
    return r;
}

ReducedSystem ReducedSystem::from_circuit(const EEGMatrices &m, const ErrorModel &model, const ReduceOptions &opt) {
    IsingSystem s = coupled_system(m.G.stacked(m.L), model);
    return from_ising(s, m.G.rows(), representative_mask(m), opt);
}

std::size_t ReducedSystem::gauge_rows() const {
    return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), 1));
}

std::vector<std::size_t> ReducedSystem::alive_gauge_rows() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < gauge_total_; ++i) {
        if (alive_[i]) out.push_back(i);
    }
    return out;
}

std::size_t ReducedSystem::min_gauge_weight() const {
    std::size_t best = 0;
    bool any = false;
    for (std::size_t i = 0; i < gauge_total_; ++i) {
        if (!alive_[i]) continue;
        if (!any || weight_[i] < best) best = weight_[i];
        any = true;
    }
    return best;
}

std::vector<double> ReducedSystem::K() const {
    std::vector<double> out;
    out.reserve(bonds_.size());
    for (const auto &b : bonds_) out.push_back(b.K);
    return out;
}

BinaryMatrix ReducedSystem::gauge_block() const {
    auto rows = alive_gauge_rows();
    BinaryMatrix out(rows.size(), bonds_.size());
    std::vector<std::size_t> pos(gauge_total_, 0);
    for (std::size_t i = 0; i < rows.size(); ++i) pos[rows[i]] = i;
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
        for (std::size_t s : bonds_[b].column.support()) {
            if (s < gauge_total_) out.set(pos[s], b);
        }
    }
    return out;
}

BinaryMatrix ReducedSystem::logical_block() const {
    BinaryMatrix out(logical_rows_, bonds_.size());
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
        for (std::size_t s : bonds_[b].column.support()) {
            if (s >= gauge_total_) out.set(s - gauge_total_, b);
        }
    }
    return out;
}

BinaryMatrix ReducedSystem::theta() const {
    BinaryMatrix g = gauge_block();
    BinaryMatrix l = logical_block();
    if (g.rows() == 0) return l;
    return g.stacked(l);
}

BinaryMatrix ReducedSystem::lineage() const {
    const std::size_t coords = rep_mask_.size();
    BinaryMatrix out(coords, bonds_.size());
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
        for (std::size_t c : bonds_[b].lineage.support()) out.set(c, b);
    }
    return out;
}

BinaryMatrix ReducedSystem::hdual() const {
    std::unordered_map<std::uint64_t, std::size_t> pos;
    for (std::size_t b = 0; b < bonds_.size(); ++b) pos[bonds_[b].id] = b;
    BinaryMatrix out(0, bonds_.size());
    for (const auto &row : dual_) {
        BitVector v(bonds_.size());
        for (auto id : row) v.flip(pos.at(id));
        out.append_row(std::move(v));
    }
    return out;
}

IsingSystem ReducedSystem::ising() const {
    IsingSystem s;
    s.theta = theta();
    s.K = K();
    s.log_const = log_const_;
    s.lineage = lineage();
    return s;
}

void ReducedSystem::add_weight(const Bond &b, int delta) {
    for (std::size_t s : b.column.support()) weight_[s] += delta;
}

void ReducedSystem::drop_bonds(const std::vector<char> &remove) {
    std::size_t out = 0;
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
        if (remove[b]) {
            add_weight(bonds_[b], -1);
            continue;
        }
        if (out != b) bonds_[out] = std::move(bonds_[b]);
        ++out;
    }
    bonds_.resize(out);
}

void ReducedSystem::dual_shorten(std::uint64_t id) {
    std::size_t pivot = dual_.size();
    for (std::size_t r = 0; r < dual_.size(); ++r) {
        if (contains(dual_[r], id)) {
            pivot = r;
            break;
        }
    }
    if (pivot == dual_.size()) return;
    std::vector<std::uint64_t> p = std::move(dual_[pivot]);
    dual_.erase(dual_.begin() + static_cast<std::ptrdiff_t>(pivot));
    for (auto &row : dual_) {
        if (contains(row, id)) row = sym_diff(row, p);
    }
    std::erase_if(dual_, [](const auto &row) { return row.empty(); });
}

void ReducedSystem::dual_substitute(std::uint64_t from, std::uint64_t to) {
    for (auto &row : dual_) {
        if (contains(row, from)) row = sym_diff(row, odd_elements({from, to}));
    }
    std::erase_if(dual_, [](const auto &row) { return row.empty(); });
}

void ReducedSystem::recompute_dual() {
    dual_.clear();
    BinaryMatrix h = kernel_basis(theta());
    for (const auto &row : h.row_vectors()) {
        std::vector<std::uint64_t> ids;
        for (std::size_t b : row.support()) ids.push_back(bonds_[b].id);
        std::sort(ids.begin(), ids.end());
        dual_.push_back(std::move(ids));
    }
}

// Drops numerically zero bonds and folds bonds that no hypothesis can flip
// into the constant, among the given ids.
void ReducedSystem::finalize_removals(const std::vector<std::uint64_t> &touched_ids) {
    if (touched_ids.empty()) return;
    std::unordered_set<std::uint64_t> touched(touched_ids.begin(), touched_ids.end());
    std::vector<char> remove(bonds_.size(), 0);
    std::vector<std::uint64_t> removed;
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
        const Bond &bond = bonds_[b];
        if (!touched.count(bond.id)) continue;
        if (std::abs(bond.K) <= opt_.zero_tolerance) {
            remove[b] = 1;
        } else if (bond.column.none() && masked_none(bond.lineage, rep_mask_)) {
            log_const_ += bond.K;
            remove[b] = 1;
        }
        if (remove[b]) removed.push_back(bond.id);
    }
    if (removed.empty()) return;
    drop_bonds(remove);
    if (opt_.track_dual) {
        for (auto id : removed) dual_shorten(id);
    }
}

void ReducedSystem::reduce_spin_inplace(std::size_t spin, bool merge) {
    if (spin >= gauge_total_) throw std::invalid_argument("reduce_spin: only gauge rows can be summed over");
    if (!alive_[spin]) throw std::invalid_argument("reduce_spin: row " + std::to_string(spin) + " already reduced");

    std::vector<std::size_t> incident;
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
        if (bonds_[b].column.get(spin)) incident.push_back(b);
    }
    const std::size_t w = incident.size();
    if (w > opt_.weight_cap) throw WeightCapExceeded(spin, w, opt_.weight_cap);

    ReductionStep step;
    step.spin = spin;
    step.weight = w;
    for (std::size_t b : incident) step.consumed.push_back(bonds_[b].id);

    alive_[spin] = 0;
    if (w == 0) {
        log_const_ += kLn2;
        provenance_.push_back(std::move(step));
        return;
    }

    const std::size_t n = w - 1;
    const std::size_t size = std::size_t{1} << n;
    std::vector<double> f(size);
    const double k1 = bonds_[incident[0]].K;
    for (std::size_t tau = 0; tau < size; ++tau) {
        double x = k1;
        for (std::size_t j = 0; j < n; ++j) {
            double kj = bonds_[incident[j + 1]].K;
            x += ((tau >> j) & 1) ? -kj : kj;
        }
        f[tau] = log_cosh(x);
    }
    fwht(f);
    const double scale = 1.0 / static_cast<double>(size);
    log_const_ += kLn2 + f[0] * scale;

    // p_j = b_{j+1} + b_1 over spins and lineage; spin `spin` cancels.
    const Bond &first = bonds_[incident[0]];
    std::vector<BitVector> pcol, plin;
    for (std::size_t j = 0; j < n; ++j) {
        const Bond &bj = bonds_[incident[j + 1]];
        pcol.push_back(bj.column ^ first.column);
        plin.push_back(bj.lineage ^ first.lineage);
    }
    const std::uint64_t b1_id = first.id;
    const std::size_t col_len = first.column.size(), lin_len = first.lineage.size();

    std::vector<char> remove(bonds_.size(), 0);
    for (std::size_t b : incident) remove[b] = 1;
    drop_bonds(remove);

    KeyHash hasher{&bonds_, &rep_mask_};
    KeyEq eq{&bonds_, &rep_mask_};
    std::unordered_set<std::size_t, KeyHash, KeyEq> index(0, hasher, eq);
    if (merge) {
        index.reserve(bonds_.size() + size);
        for (std::size_t b = 0; b < bonds_.size(); ++b) index.insert(b);
    }

    std::vector<std::uint64_t> target(size, 0);
    std::vector<std::uint64_t> touched;
    auto emit = [&](std::size_t S, BitVector col, BitVector lin) {
        bonds_.push_back(Bond{std::move(col), std::move(lin), f[S] * scale, next_id_});
        if (merge) {
            auto [it, inserted] = index.insert(bonds_.size() - 1);
            if (!inserted) {
                Bond &existing = bonds_[*it];
                existing.K += bonds_.back().K;
                target[S] = existing.id;
                touched.push_back(existing.id);
                bonds_.pop_back();
                return;
            }
        }
        target[S] = next_id_++;
        add_weight(bonds_.back(), +1);
        touched.push_back(target[S]);
        ++step.created;
    };

    for (std::size_t j = 0; j < n; ++j) emit(std::size_t{1} << j, pcol[j], plin[j]);
    BitVector acc_col(col_len), acc_lin(lin_len);
    std::vector<std::vector<std::uint64_t>> relations;
    for (std::size_t t = 1; t < size; ++t) {
        std::size_t S = t ^ (t >> 1);
        std::size_t bit = static_cast<std::size_t>(std::countr_zero(t));
        acc_col ^= pcol[bit];
        acc_lin ^= plin[bit];
        if (std::popcount(S) == 1) continue;
        emit(S, acc_col, acc_lin);
        if (opt_.track_dual) {
            std::size_t prev = S ^ (std::size_t{1} << bit);
            auto rel = odd_elements({target[prev], target[std::size_t{1} << bit], target[S]});
            if (!rel.empty()) relations.push_back(std::move(rel));
        }
    }

    if (opt_.track_dual) {
        for (auto &row : dual_) {
            std::vector<std::uint64_t> toggles;
            for (std::size_t j = 0; j < n; ++j) {
                std::uint64_t bj = step.consumed[j + 1];
                if (contains(row, bj)) toggles.insert(toggles.end(), {bj, b1_id, target[std::size_t{1} << j]});
            }
            if (!toggles.empty()) row = sym_diff(row, odd_elements(std::move(toggles)));
            if (contains(row, b1_id)) throw std::logic_error("reduce_spin: dual row kept the eliminated bond");
        }
        std::erase_if(dual_, [](const auto &row) { return row.empty(); });
        for (auto &rel : relations) dual_.push_back(std::move(rel));
    }

    provenance_.push_back(std::move(step));
    finalize_removals(touched);
}

void ReducedSystem::eliminate_spin_inplace(std::size_t spin, std::size_t max_dim) {
    if (spin >= gauge_total_) throw std::invalid_argument("eliminate_spin: only gauge rows can be summed over");
    if (!alive_[spin]) throw std::invalid_argument("eliminate_spin: row " + std::to_string(spin) + " already reduced");

    std::vector<std::size_t> incident;
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
        if (bonds_[b].column.get(spin)) incident.push_back(b);
    }
    const std::size_t w = incident.size();
    ReductionStep step;
    step.spin = spin;
    step.weight = w;
    for (std::size_t b : incident) step.consumed.push_back(bonds_[b].id);
    alive_[spin] = 0;
    if (w == 0) {
        log_const_ += kLn2;
        provenance_.push_back(std::move(step));
        return;
    }

    // Keys (column without `spin` | masked lineage) and their coordinates in
    // a basis made of incident bonds.
    const std::size_t col_len = bonds_[incident[0]].column.size();
    BinaryMatrix keys(0, col_len + rep_mask_.size());
    for (std::size_t b : incident) {
        BitVector col = bonds_[b].column;
        col.set(spin, false);
        keys.append_row(col.concat(bonds_[b].lineage & rep_mask_));
    }
    const std::vector<std::size_t> basis = RowSpace(keys).independent_rows();
    const std::size_t d = basis.size();
    if (d > max_dim) throw WeightCapExceeded(spin, d, max_dim);
    RowSpace coords(keys.select_rows(basis));
    std::vector<std::uint64_t> c(w);
    for (std::size_t i = 0; i < w; ++i) c[i] = coords.solve(keys.row(i))->to_uint();

    const std::size_t size = std::size_t{1} << d;
    std::vector<double> f(size);
    for (std::size_t y = 0; y < size; ++y) {
        double x = 0.0;
        for (std::size_t i = 0; i < w; ++i) {
            double k = bonds_[incident[i]].K;
            x += (std::popcount(y & c[i]) & 1) ? -k : k;
        }
        f[y] = log_cosh(x);
    }
    fwht(f);
    const double scale = 1.0 / static_cast<double>(size);
    log_const_ += kLn2 + f[0] * scale;

    std::vector<BitVector> bcol, blin;
    for (std::size_t i : basis) {
        BitVector col = bonds_[incident[i]].column;
        col.set(spin, false);
        bcol.push_back(std::move(col));
        blin.push_back(bonds_[incident[i]].lineage);
    }
    std::vector<char> remove(bonds_.size(), 0);
    for (std::size_t b : incident) remove[b] = 1;
    drop_bonds(remove);

    BitVector acc_col(col_len), acc_lin(rep_mask_.size());
    for (std::size_t t = 1; t < size; ++t) {
        std::size_t z = t ^ (t >> 1);
        std::size_t bit = static_cast<std::size_t>(std::countr_zero(t));
        acc_col ^= bcol[bit];
        acc_lin ^= blin[bit];
        double k = f[z] * scale;
        if (std::abs(k) <= opt_.zero_tolerance) continue;
        bonds_.push_back(Bond{acc_col, acc_lin, k, next_id_++});
        add_weight(bonds_.back(), +1);
        ++step.created;
    }
    provenance_.push_back(std::move(step));
    merge_inplace();
    std::vector<std::uint64_t> all;
    for (const auto &b : bonds_) all.push_back(b.id);
    finalize_removals(all);
    if (opt_.track_dual) recompute_dual();
}

void ReducedSystem::merge_inplace() {
    KeyHash hasher{&bonds_, &rep_mask_};
    KeyEq eq{&bonds_, &rep_mask_};
    std::unordered_set<std::size_t, KeyHash, KeyEq> index(0, hasher, eq);
    index.reserve(bonds_.size());
    std::vector<char> remove(bonds_.size(), 0);
    std::vector<std::uint64_t> touched;
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
        auto [it, inserted] = index.insert(b);
        if (inserted) continue;
        Bond &keep = bonds_[*it];
        keep.K += bonds_[b].K;
        remove[b] = 1;
        touched.push_back(keep.id);
        if (opt_.track_dual) dual_substitute(bonds_[b].id, keep.id);
    }
    if (!touched.empty()) drop_bonds(remove);
    finalize_removals(touched);
}

void ReducedSystem::threshold_inplace(double eps) {
    if (eps < 0) throw std::invalid_argument("threshold: epsilon must be non-negative");
    std::vector<char> remove(bonds_.size(), 0);
    bool any = false;
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
        if (std::abs(bonds_[b].K) <= eps) remove[b] = 1, any = true;
    }
    if (!any) return;
    drop_bonds(remove);
    if (opt_.track_dual) recompute_dual();
}

void ReducedSystem::truncate_inplace(std::size_t chi) {
    if (chi >= bonds_.size()) return;
    std::vector<std::size_t> order(bonds_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(bonds_[a].K) > std::abs(bonds_[b].K); });
    std::vector<char> remove(bonds_.size(), 1);
    for (std::size_t i = 0; i < chi; ++i) remove[order[i]] = 0;
    drop_bonds(remove);
    if (opt_.track_dual) recompute_dual();
}

ReducedSystem reduce_spin(ReducedSystem r, std::size_t spin, bool merge) {
    r.reduce_spin_inplace(spin, merge);
    return r;
}

namespace {

// Lowest-weight remaining gauge row (lowest index on ties), or none.
std::size_t pick_row(const ReducedSystem &r, std::size_t wmax) {
    std::size_t best = static_cast<std::size_t>(-1);
    std::size_t best_w = 0;
    for (std::size_t i = 0; i < r.gauge_total(); ++i) {
        if (!r.is_alive(i)) continue;
        std::size_t w = r.row_weight(i);
        if (w > wmax) continue;
        if (best == static_cast<std::size_t>(-1) || w < best_w) {
            best = i;
            best_w = w;
        }
    }
    return best;
}

}  // namespace

ReducedSystem reduce_up_to_weight(ReducedSystem r, std::size_t wmax) {
    if (wmax < 1) throw std::invalid_argument("reduce_up_to_weight: wmax must be at least 1");
    for (;;) {
        std::size_t spin = pick_row(r, wmax);
        if (spin == static_cast<std::size_t>(-1)) break;
        if (r.bond_count() > r.options().max_bonds) break;
        r.reduce_spin_inplace(spin, true);
        r.merge_inplace();
    }
    return r;
}

ReducedSystem full_reduce(ReducedSystem r, std::size_t cap) {
    const std::size_t wmax = std::min(cap, r.options().weight_cap);
    return reduce_up_to_weight(std::move(r), wmax);
}

ReducedSystem complete_reduce(ReducedSystem r, std::size_t cap, std::size_t max_dim) {
    r = full_reduce(std::move(r), cap);
    while (!r.complete()) {
        std::size_t spin = pick_row(r, static_cast<std::size_t>(-1));
        r.eliminate_spin_inplace(spin, max_dim);
    }
    return r;
}

ReducedSystem full_reduce(ReducedSystem r) {
    std::size_t cap = r.options().weight_cap;
    return full_reduce(std::move(r), cap);
}

ReducedSystem merge_columns(ReducedSystem r) {
    r.merge_inplace();
    return r;
}

ReducedSystem threshold(ReducedSystem r, double eps) {
    r.threshold_inplace(eps);
    return r;
}

ReducedSystem truncate(ReducedSystem r, std::size_t chi) {
    r.truncate_inplace(chi);
    return r;
}

std::size_t count_above(const ReducedSystem &r, double eps) {
    return static_cast<std::size_t>(
        std::count_if(r.bonds().begin(), r.bonds().end(), [&](const Bond &b) { return std::abs(b.K) > eps; }));
}

}  // namespace eegdec
