#pragma once

#include <string>

#include "nnmt/classify.hpp"
#include "nnmt/core.hpp"

namespace nnmt {

/// Load a pooled sample from two CSV files (group 1, then group 2).
/// Comma-separated, one point per row, optional auto-detected header.
PooledSample ingest_two_files(const std::string& first_path,
                              const std::string& second_path);

/// Load a pooled sample from a single CSV whose header names a group
/// column (values 1 or 2); the remaining columns are coordinates.
PooledSample ingest_grouped(const std::string& data_path,
                            const std::string& group_col = "g");

/// Load labeled points from a single CSV whose header names a 0/1 outcome
/// column; the remaining columns are coordinates.
LabeledPoints ingest_labeled(const std::string& data_path,
                             const std::string& y_col, double lambda);

/// Command-line front end. Exit codes: 0 success (whatever the decision),
/// 2 usage error, 3 data error, 1 internal error.
int run_cli(int argc, const char* const* argv);

}  // namespace nnmt
