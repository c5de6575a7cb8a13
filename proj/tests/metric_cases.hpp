#pragma once

#include <string>
#include <vector>

#include "sigex/core/grid.hpp"

// Hand-enumerated 4x4 metric cases. Grids are written row by row, '1' = set.
namespace sigex::testing {

inline Grid parse4(const std::string& rows) {
  Grid g(4, 4);
  std::size_t i = 0;
  for (char ch : rows) {
    if (ch == '/') continue;
    g.cells()[i++] = ch == '1' ? 1.0 : 0.0;
  }
  return g;
}

struct MetricCase {
  std::string name;
  Grid retained;
  Grid gt;
  std::vector<Grid> others;
  double removed;
  double overwritten;
  int intersecting;
};

inline std::vector<MetricCase> metric_cases() {
  return {
      // 8 noise cells, 6 whitened; (2,0) hangs off the top block, which the
      // other class touches
      {"partial noise removal",
       parse4("1111/1111/1000/0001"),
       parse4("1111/1111/0000/0000"),
       {parse4("0000/0000/1000/0000")},
       75.0,
       0.0,
       1},
      // 4 tone cells, 1 whitened; one blob touched by two other classes
      {"one tone cell lost",
       parse4("0000/0110/0100/0000"),
       parse4("0000/0110/0110/0000"),
       {parse4("0000/0100/0000/0000"), parse4("0000/0000/0100/0000")},
       100.0,
       25.0,
       1},
      // three components, two of them on other classes' templates
      {"three components",
       parse4("1001/1001/0000/0110"),
       parse4("1000/1000/0000/0000"),
       {parse4("0001/0000/0000/0000"), parse4("0000/0000/0000/0010")},
       100.0 * 10.0 / 14.0,
       0.0,
       2},
      // everything whitened
      {"all white",
       parse4("0000/0000/0000/0000"),
       parse4("0000/1111/0000/0000"),
       {parse4("1111/1111/1111/1111")},
       100.0,
       100.0,
       0},
      // nothing whitened; the whole grid is one component
      {"nothing whitened",
       parse4("1111/1111/1111/1111"),
       parse4("1000/0100/0010/0001"),
       {parse4("0001/0000/0000/0000"), parse4("0000/0000/0000/1000")},
       0.0,
       0.0,
       1},
  };
}

}  // namespace sigex::testing
