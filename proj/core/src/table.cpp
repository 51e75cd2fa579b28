#include "eegdec/table.hpp"

#include <cstdio>
#include <sstream>

#include "eegdec/eeg.hpp"
#include "eegdec/noise.hpp"
#include "eegdec/reduce.hpp"

namespace eegdec {

namespace {

Dims dims_of(const ReducedSystem &r) { return {r.gauge_rows(), r.bond_count()}; }

std::string format_eps(double eps) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", eps);
    return buf;
}

}  // namespace

TableRow table_row(const CliffordCircuit &c, std::size_t ncyc, std::size_t d0, const TableOptions &opt) {
    EEGMatrices m = build_eeg(c);
    ErrorModel model = iid_xz(m.params.N, opt.p, opt.p);
    ReduceOptions ro;
    ro.track_dual = false;
    ro.max_bonds = opt.max_bonds;

    TableRow row;
    row.n0 = m.params.n0;
    row.na = m.params.na;
    row.ncyc = ncyc;
    row.d0 = d0;
    row.ell1 = m.params.ell1();

    ReducedSystem r = ReducedSystem::from_circuit(m, model, ro);
    row.orig = {m.G.rows(), r.bond_count()};
    r = reduce_up_to_weight(std::move(r), 2);
    row.w2 = dims_of(r);
    r = reduce_up_to_weight(std::move(r), 3);
    row.w3 = dims_of(r);
    if (opt.with_w4) {
        r = reduce_up_to_weight(std::move(r), 4);
        row.w4 = dims_of(r);
    }
    r = full_reduce(std::move(r), opt.final_cap);
    row.final_dims = dims_of(r);
    row.w_fin = r.min_gauge_weight();
    row.incomplete = !r.complete() && row.w_fin <= opt.final_cap;
    for (double eps : opt.epsilons) row.m_eps.push_back(count_above(r, eps));
    return row;
}

std::string table_header(const TableOptions &opt) {
    std::string h = "n0,na,ncyc,d0,orig_rows,orig_cols,w2_rows,w2_cols,w3_rows,w3_cols,w4_rows,w4_cols,"
                    "final_rows,final_cols,w_fin";
    for (double eps : opt.epsilons) h += ",m_eps_" + format_eps(eps);
    return h + ",ell1";
}

std::string format_row(const TableRow &row, const TableOptions &opt) {
    std::ostringstream out;
    out << row.n0 << ',' << row.na << ',' << row.ncyc << ',' << row.d0 << ',' << row.orig.rows << ','
        << row.orig.cols << ',' << row.w2.rows << ',' << row.w2.cols << ',' << row.w3.rows << ',' << row.w3.cols
        << ',';
    if (row.w4) out << row.w4->rows << ',' << row.w4->cols;
    else out << ',';
    out << ',';
    if (row.incomplete) {
        out << "incomplete,incomplete,incomplete";
        for (std::size_t i = 0; i < opt.epsilons.size(); ++i) out << ",incomplete";
    } else {
        out << row.final_dims.rows << ',' << row.final_dims.cols << ',' << row.w_fin;
        for (auto m : row.m_eps) out << ',' << m;
    }
    out << ',' << row.ell1;
    return out.str();
}

}  // namespace eegdec
