#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "eegdec/gf2.hpp"
#include "eegdec/ising.hpp"

namespace eegdec {

struct EEGMatrices;
struct ErrorModel;

struct Bond {
    BitVector column;   // over spin ids: gauge rows first, then logical rows
    BitVector lineage;  // over the original error coordinates
    double K = 0.0;
    std::uint64_t id = 0;
};

struct ReductionStep {
    std::size_t spin = 0;
    std::size_t weight = 0;
    std::vector<std::uint64_t> consumed;
    std::size_t created = 0;
};

struct ReduceOptions {
    /// Largest row weight reduce_spin accepts (2^(w-1) - 1 new bonds).
    std::size_t weight_cap = 20;
    /// Keep the dual parity-check matrix up to date.
    bool track_dual = true;
    /// Coefficients with |K| at or below this are treated as zero and dropped.
    double zero_tolerance = 1e-12;
    /// full_reduce stops (incomplete) once the bond count exceeds this.
    std::size_t max_bonds = std::size_t{1} << 22;
};

class WeightCapExceeded : public std::runtime_error {
   public:
    WeightCapExceeded(std::size_t spin, std::size_t weight, std::size_t cap);
    std::size_t weight() const { return weight_; }

   private:
    std::size_t weight_;
};

/// Snapshot (G^(j), L^(j), H^(j), K^(j)) of the reduction sequence.
///
/// Spins keep their original ids; reduced gauge spins are marked dead.
/// Logical rows are never reduced. Bonds carry stable ids which the dual
/// rows refer to.
class ReducedSystem {
   public:
    ReducedSystem() = default;

    /// Rows [0, gauge_rows) of s.theta form the gauge block, the rest the
    /// logical block. `rep_mask` selects the lineage coordinates compared
    /// when merging (all coordinates if empty).
    static ReducedSystem from_ising(const IsingSystem &s, std::size_t gauge_rows, BitVector rep_mask = {},
                                    const ReduceOptions &opt = {});
    /// Spins are all rows of G followed by the rows of L; bonds are the
    /// model's columns.
    static ReducedSystem from_circuit(const EEGMatrices &m, const ErrorModel &model, const ReduceOptions &opt = {});

    std::size_t gauge_total() const { return gauge_total_; }
    std::size_t logical_rows() const { return logical_rows_; }
    std::size_t gauge_rows() const;
    std::vector<std::size_t> alive_gauge_rows() const;
    bool is_alive(std::size_t spin) const { return spin >= gauge_total_ || alive_[spin]; }
    std::size_t row_weight(std::size_t spin) const { return weight_.at(spin); }
    /// Smallest weight among remaining gauge rows (0 if none remain).
    std::size_t min_gauge_weight() const;

    std::size_t bond_count() const { return bonds_.size(); }
    const std::vector<Bond> &bonds() const { return bonds_; }
    std::vector<double> K() const;
    double log_const() const { return log_const_; }
    /// ln 2 times the number of redundant gauge rows in the initial system.
    double log_offset() const { return log_offset_; }
    const std::vector<ReductionStep> &provenance() const { return provenance_; }
    std::size_t steps() const { return provenance_.size(); }
    bool complete() const { return gauge_rows() == 0; }
    const ReduceOptions &options() const { return opt_; }
    const BitVector &rep_mask() const { return rep_mask_; }

    /// Remaining rows (gauge block, then logical block) × bonds.
    BinaryMatrix theta() const;
    BinaryMatrix gauge_block() const;
    BinaryMatrix logical_block() const;
    /// Coordinates × bonds.
    BinaryMatrix lineage() const;
    /// Dual rows over bond positions; empty matrix when not tracked.
    BinaryMatrix hdual() const;
    bool tracks_dual() const { return opt_.track_dual; }
    IsingSystem ising() const;

    void reduce_spin_inplace(std::size_t spin, bool merge);
    /// Sums over one gauge spin of any weight by a Walsh transform over the
    /// span of its bonds' merge keys; `max_dim` caps that span.
    void eliminate_spin_inplace(std::size_t spin, std::size_t max_dim);
    void merge_inplace();
    void threshold_inplace(double eps);
    void truncate_inplace(std::size_t chi);

   private:
    struct KeyHash;
    struct KeyEq;

    void add_weight(const Bond &b, int delta);
    void drop_bonds(const std::vector<char> &remove);
    void dual_shorten(std::uint64_t id);
    void dual_substitute(std::uint64_t from, std::uint64_t to);
    void recompute_dual();
    void finalize_removals(const std::vector<std::uint64_t> &touched_ids);

    std::size_t gauge_total_ = 0;
    std::size_t logical_rows_ = 0;
    std::vector<char> alive_;
    std::vector<std::size_t> weight_;
    std::vector<Bond> bonds_;
    std::uint64_t next_id_ = 0;
    double log_const_ = 0.0;
    double log_offset_ = 0.0;
    BitVector rep_mask_;
    std::vector<std::vector<std::uint64_t>> dual_;
    std::vector<ReductionStep> provenance_;
    ReduceOptions opt_;
};

/// ln cosh x without overflow.
double log_cosh(double x);

/// Sums over one gauge spin. Without `merge` every one of the 2^(w-1)-1
/// subset bonds is kept as a separate column.
ReducedSystem reduce_spin(ReducedSystem r, std::size_t spin, bool merge = false);

/// Repeatedly reduces the gauge row of lowest current weight (lowest index
/// on ties) while that weight is at most wmax, merging after every step.
ReducedSystem reduce_up_to_weight(ReducedSystem r, std::size_t wmax);

/// Same as reduce_up_to_weight with wmax = `cap`; the result is complete
/// iff no gauge rows remain. Stops early when the bond budget is exceeded.
ReducedSystem full_reduce(ReducedSystem r, std::size_t cap);
ReducedSystem full_reduce(ReducedSystem r);

/// full_reduce followed by eliminate_spin on the remaining rows, lowest
/// weight first; always complete unless a span exceeds `max_dim`.
ReducedSystem complete_reduce(ReducedSystem r, std::size_t cap, std::size_t max_dim = 24);

ReducedSystem merge_columns(ReducedSystem r);
/// Removes bonds with |K| <= eps.
ReducedSystem threshold(ReducedSystem r, double eps);
/// Keeps the chi largest |K| (lower index wins ties).
ReducedSystem truncate(ReducedSystem r, std::size_t chi);

/// Number of bonds with |K| > eps.
std::size_t count_above(const ReducedSystem &r, double eps);

}  // namespace eegdec
