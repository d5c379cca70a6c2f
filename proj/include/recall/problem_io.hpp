#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "recall/recall_core.hpp"

namespace recall {

// CSV with header `segment,stratum,population,sample,relevant`. Blank lines
// and lines starting with '#' are ignored. Throws ParseError with a 1-based
// line number, or DomainError naming the offending stratum.
RecallProblem read_problem_csv(std::istream& in);
RecallProblem read_problem_csv_file(const std::string& path);

void write_problem_csv(std::ostream& out, const RecallProblem& problem);

// "N,n,r" shorthand for a single-stratum segment.
StratumCounts parse_stratum_triple(std::string_view text);

// Writes `estimate,probability` rows.
void write_distribution_csv(std::ostream& out, const SamplingDistribution& dist);

}  // namespace recall
