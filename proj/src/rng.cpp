#include "extval/rng.hpp"

#include "extval/stats.hpp"

namespace extval {

double RandomStream::normal() { return normal_quantile(uniform01()); }

}  // namespace extval
