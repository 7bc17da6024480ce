#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gridseg/grid.hpp"

namespace gridseg::io {

/// Long-form grid CSV: header `w,h,x1,...,xp`, one row per cell in any order.
/// Dimensions are taken from the largest w and h; duplicate or missing cells are errors.
Grid read_grid_csv(std::istream& in);
Grid read_grid_csv_file(const std::string& path);
void write_grid_csv(std::ostream& out, const Grid& grid);

/// Scatter CSV: header `cx,cy,x1,...,xp`.
std::vector<ScatterPoint> read_scatter_csv(std::istream& in);
std::vector<ScatterPoint> read_scatter_csv_file(const std::string& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace gridseg::io
