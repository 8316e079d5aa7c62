#pragma once

#include <string>
#include <utility>

#include "expdes/core.hpp"

namespace expdes {

// CSV ingestion. All formats: comma delimiter, required header row, UTF-8,
// '.' decimal, no thousands separators. Unit ids are 1-based integers; rows
// are sorted by unit id on load. Every error message names the file path
// and the offending row or column.

// Header `unit,x1,...,xd`.
CovariateMatrix parse_covariates(const std::string& path);

// Long-form header `unit,period,outcome`; the n x T grid must be complete.
PanelData parse_panel(const std::string& path, int t0);

// Header `unit,y1,y0`.
ScienceTable parse_science_table(const std::string& path);

// Header `unit,y,w`; w must be 0 or 1. Returns observed outcomes and the
// realized assignment.
std::pair<Vec, AssignmentVector> parse_observed(const std::string& path);

}  // namespace expdes
