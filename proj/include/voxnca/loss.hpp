#pragma once

#include <vector>

#include "voxnca/grid.hpp"

namespace voxnca {

// Growth loss against a frozen voxel-type target:
//   loss = 1/2 * CE_split + IOU
//   CE_split = 1/2 * mean(CE | target empty) + 1/2 * mean(CE | target non-empty)
//   IOU = 1 - sum_i min(q_i, m_i) / sum_i max(q_i, m_i)
// with y_i the softmax of the first k channels, q_i = 1 - y_i[empty] and
// m_i = [target_i != empty]. The gradient covers the k type channels of every
// cell (other channels do not enter the loss).
template <class Real>
struct LossResult {
    Real loss = Real(0);
    Real ce = Real(0);   // the CE_split term (before the 1/2 factor)
    Real iou = Real(0);
    std::vector<Real> grad;  // cells * D, per-cell state layout
};

template <class Real>
LossResult<Real> nca_loss(const BasicGrid<Real>& grid, const TypeField& target);

// Rejects targets the trainer cannot use (dim mismatch handled by nca_loss).
void validate_target(const TypeField& target);

}  // namespace voxnca
