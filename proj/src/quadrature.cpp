// Quadrature rule lookup over pre-generated Gauss tables.
#include "tdnns/quadrature.hpp"

#include <array>
#include <string>

#include "quad_tables.inc"

namespace tdnns {

namespace {

constexpr int kMaxPoints = 7;  // tables store m = 1..7, exactness 2m-1

struct TableRef {
  const double* pts;
  const double* wts;
};

const std::array<TableRef, kMaxPoints> seg_tables = {{{detail::seg_pts_1, detail::seg_wts_1},
                                                      {detail::seg_pts_2, detail::seg_wts_2},
                                                      {detail::seg_pts_3, detail::seg_wts_3},
                                                      {detail::seg_pts_4, detail::seg_wts_4},
                                                      {detail::seg_pts_5, detail::seg_wts_5},
                                                      {detail::seg_pts_6, detail::seg_wts_6},
                                                      {detail::seg_pts_7, detail::seg_wts_7}}};

const std::array<TableRef, kMaxPoints> tri_tables = {{{detail::tri_pts_1, detail::tri_wts_1},
                                                      {detail::tri_pts_2, detail::tri_wts_2},
                                                      {detail::tri_pts_3, detail::tri_wts_3},
                                                      {detail::tri_pts_4, detail::tri_wts_4},
                                                      {detail::tri_pts_5, detail::tri_wts_5},
                                                      {detail::tri_pts_6, detail::tri_wts_6},
                                                      {detail::tri_pts_7, detail::tri_wts_7}}};

int points_for_degree(int degree, const char* what) {
  TDNNS_REQUIRE(degree >= 0 && degree <= kMaxQuadDegree,
                std::string(what) + " rule degree " + std::to_string(degree) +
                    " out of range [0, " + std::to_string(kMaxQuadDegree) + "]");
  return degree / 2 + 1;  // m points integrate degree 2m-1 exactly
}

}  // namespace

const QuadRule& segment_rule(int degree) {
  static std::array<QuadRule, kMaxPoints> cache;
  const int m = points_for_degree(degree, "segment");
  QuadRule& rule = cache[m - 1];
  if (rule.points.empty()) {
    rule.exactness = 2 * m - 1;
    for (int i = 0; i < m; ++i) {
      rule.points.push_back({seg_tables[m - 1].pts[i], 0.0});
      rule.weights.push_back(seg_tables[m - 1].wts[i]);
    }
  }
  return rule;
}

const QuadRule& triangle_rule(int degree) {
  static std::array<QuadRule, kMaxPoints> cache;
  const int m = points_for_degree(degree, "triangle");
  QuadRule& rule = cache[m - 1];
  if (rule.points.empty()) {
    rule.exactness = 2 * m - 1;
    for (int i = 0; i < m * m; ++i) {
      rule.points.push_back({tri_tables[m - 1].pts[2 * i], tri_tables[m - 1].pts[2 * i + 1]});
      rule.weights.push_back(tri_tables[m - 1].wts[i]);
    }
  }
  return rule;
}

}  // namespace tdnns
