#include "pdl/assignment.hpp"

#include <limits>

#include "pdl/errors.hpp"

namespace pdl {

std::vector<int> solve_assignment(const Mat& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw DimensionError("solve_assignment: cost matrix must be square");
  if (n == 0) return {};
  if (!cost.allFinite()) throw DomainError("solve_assignment: non-finite cost");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Row-major copy so row scans are contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c = cost;
  auto C = [&](int i, int j) { return c(i, j); };

  std::vector<int> rowsol(n, -1), colsol(n, -1), matches(n, 0), freerows(n), collist(n), pred(n);
  std::vector<double> v(n), d(n);

  // Column reduction.
  for (int j = n - 1; j >= 0; --j) {
    double mn = C(0, j);
    int imin = 0;
    for (int i = 1; i < n; ++i)
      if (C(i, j) < mn) {
        mn = C(i, j);
        imin = i;
      }
    v[j] = mn;
    if (++matches[imin] == 1) {
      rowsol[imin] = j;
      colsol[j] = imin;
    } else {
      colsol[j] = -1;
    }
  }

  // Reduction transfer.
  int numfree = 0;
  for (int i = 0; i < n; ++i) {
    if (matches[i] == 0) {
      freerows[numfree++] = i;
    } else if (matches[i] == 1) {
      const int j1 = rowsol[i];
      double mn = inf;
      for (int j = 0; j < n; ++j)
        if (j != j1 && C(i, j) - v[j] < mn) mn = C(i, j) - v[j];
      if (mn < inf) v[j1] -= mn;
    }
  }

  // No augmenting row reduction: on real-valued costs it can requeue rows
  // with tiny price decrements for a very long time.
  // Augmentation by shortest paths.
  for (int f = 0; f < numfree; ++f) {
    const int freerow = freerows[f];
    for (int j = 0; j < n; ++j) {
      d[j] = C(freerow, j) - v[j];
      pred[j] = freerow;
      collist[j] = j;
    }
    int low = 0, up = 0, last = 0, endofpath = -1;
    double mn = 0.0;
    bool found = false;
    do {
      if (up == low) {
        last = low - 1;
        mn = d[collist[up++]];
        for (int k = up; k < n; ++k) {
          const int j = collist[k];
          const double h = d[j];
          if (h <= mn) {
            if (h < mn) {
              up = low;
              mn = h;
            }
            collist[k] = collist[up];
            collist[up++] = j;
          }
        }
        for (int k = low; k < up; ++k)
          if (colsol[collist[k]] < 0) {
            endofpath = collist[k];
            found = true;
            break;
          }
      }
      if (!found) {
        const int j1 = collist[low++];
        const int i = colsol[j1];
        const double h = C(i, j1) - v[j1] - mn;
        for (int k = up; k < n; ++k) {
          const int j = collist[k];
          const double v2 = C(i, j) - v[j] - h;
          if (v2 < d[j]) {
            pred[j] = i;
            if (v2 == mn) {
              if (colsol[j] < 0) {
                endofpath = j;
                found = true;
                break;
              }
              collist[k] = collist[up];
              collist[up++] = j;
            }
            d[j] = v2;
          }
        }
      }
    } while (!found);

    for (int k = 0; k <= last; ++k) {
      const int j1 = collist[k];
      v[j1] += d[j1] - mn;
    }
    int i;
    do {
      i = pred[endofpath];
      colsol[endofpath] = i;
      const int j1 = endofpath;
      endofpath = rowsol[i];
      rowsol[i] = j1;
    } while (i != freerow);
  }
  return rowsol;
}

}  // namespace pdl
