#pragma once

#include <vector>

#include "lenspec/geometry.hpp"
#include "lenspec/word.hpp"

namespace lenspec {

// Closed polyline in the cover chart. The vertex after the last one is the
// image of vertices[0] under the deck transformation of `word`.
struct Loop {
  std::vector<ChartPoint> vertices;
  Word word;
  double length = 0.0;
};

ChartPoint closing_vertex(const MetricModel& model, const Loop& loop);
// Sum of geodesic segment lengths, closing segment included.
double polyline_length(const MetricModel& model, const Loop& loop);

}  // namespace lenspec
