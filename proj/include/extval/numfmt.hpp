#pragma once

#include <string>

namespace extval {

/// Shortest decimal form with 17 significant digits: enough to reproduce any
/// IEEE double exactly on re-parse. Used in CSV outputs.
std::string format_sig17(double x);

/// 12-significant-digit form used in JSON summaries.
std::string format_sig12(double x);

/// The double nearest the 12-significant-digit decimal form of x. Summary
/// values are passed through this before serialization so emitted JSON
/// numbers carry exactly the documented precision.
double round_sig12(double x);

}  // namespace extval
