#include "voxnca/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace voxnca {

void validate_target(const TypeField& target) {
    if (target.non_empty_count() == 0)
        throw std::invalid_argument("target morphology has no non-empty voxels");
}

template <class Real>
LossResult<Real> nca_loss(const BasicGrid<Real>& grid, const TypeField& target) {
    if (grid.variant != GridVariant::Conv)
        throw std::invalid_argument("nca_loss expects a conv-variant grid");
    if (grid.nx != target.nx || grid.ny != target.ny || grid.nz != target.nz)
        throw std::invalid_argument("grid/target dims mismatch");

    const int k = grid.type_channels;
    const int d = grid.channels();
    const int cells = grid.cell_count();

    int n_empty = 0, n_body = 0;
    for (int i = 0; i < cells; ++i)
        (target.types[size_t(i)] == VoxelType::Empty ? n_empty : n_body) += 1;

    LossResult<Real> res;
    res.grad.assign(size_t(cells) * size_t(d), Real(0));

    std::vector<double> y(size_t(cells) * size_t(k));
    double ce_empty = 0.0, ce_body = 0.0;
    double s_min = 0.0, s_max = 0.0;

    for (int i = 0; i < cells; ++i) {
        const Real* c = grid.cell(i);
        double* yi = y.data() + size_t(i) * size_t(k);
        double mx = double(c[0]);
        for (int j = 1; j < k; ++j) mx = std::max(mx, double(c[j]));
        double sum = 0.0;
        for (int j = 0; j < k; ++j) {
            yi[j] = std::exp(double(c[j]) - mx);
            sum += yi[j];
        }
        for (int j = 0; j < k; ++j) yi[j] /= sum;

        const int t = int(target.types[size_t(i)]);
        const double ce = -std::log(std::max(yi[t], 1e-300));
        (t == 0 ? ce_empty : ce_body) += ce;

        const double q = 1.0 - yi[0];
        const double m = t != 0 ? 1.0 : 0.0;
        s_min += std::min(q, m);
        s_max += std::max(q, m);
    }

    const double mean_empty = n_empty > 0 ? ce_empty / n_empty : 0.0;
    const double mean_body = n_body > 0 ? ce_body / n_body : 0.0;
    const double ce_split = 0.5 * mean_empty + 0.5 * mean_body;
    const double iou = s_max > 0.0 ? 1.0 - s_min / s_max : 0.0;

    res.ce = Real(ce_split);
    res.iou = Real(iou);
    res.loss = Real(0.5 * ce_split + iou);

    // gradient wrt type-channel logits
    for (int i = 0; i < cells; ++i) {
        const double* yi = y.data() + size_t(i) * size_t(k);
        Real* gi = res.grad.data() + size_t(i) * size_t(d);
        const int t = int(target.types[size_t(i)]);
        const double pop = t == 0 ? double(n_empty) : double(n_body);
        const double wce = pop > 0.0 ? 0.25 / pop : 0.0;  // 1/2 (loss) * 1/2 (split) / |pop|

        // IOU: q in (0,1), so the min/max branches are fixed by m
        //   m=1: d IOU/dq = -1/s_max ; m=0: d IOU/dq = s_min/s_max^2
        double diou_dq = 0.0;
        if (s_max > 0.0) diou_dq = t != 0 ? -1.0 / s_max : s_min / (s_max * s_max);
        const double dq_dy0 = -1.0;

        for (int j = 0; j < k; ++j) {
            double gce = wce * (yi[j] - (j == t ? 1.0 : 0.0));
            // dy0/dlogit_j = y0 * ([j==0] - y_j)
            double dy0 = yi[0] * ((j == 0 ? 1.0 : 0.0) - yi[j]);
            double giou = diou_dq * dq_dy0 * dy0;
            gi[j] = Real(gce + giou);
        }
    }
    return res;
}

template LossResult<float> nca_loss<float>(const BasicGrid<float>&, const TypeField&);
template LossResult<double> nca_loss<double>(const BasicGrid<double>&, const TypeField&);

}  // namespace voxnca
