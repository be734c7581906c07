#pragma once

#include <span>

#include "pat/bbox.hpp"

namespace pat::eval {

double area(const BBox& b);

// Intersection over union; 0 for disjoint boxes and when both boxes have
// zero area.
double iou(const BBox& a, const BBox& b);

// Rasterized IOU over a grid x grid lattice of cell centres.
double iou_pixel_oracle(const BBox& a, const BBox& b, int grid = 512);

// mean_j IOU(inert_j, gt_j) - mean_j IOU(adv_j, gt_j).
double mu_ioud(std::span<const BBox> pred_inert, std::span<const BBox> pred_adv, std::span<const BBox> gt);

}  // namespace pat::eval
