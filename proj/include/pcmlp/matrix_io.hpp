#pragma once

#include <iosfwd>
#include <string>

#include "pcmlp/features.hpp"
#include "pcmlp/models.hpp"
#include "pcmlp/types.hpp"

namespace pcmlp {

// Plain-text matrix block: a "rows cols" header line followed by one line per
// row of whitespace-separated values written with 17 significant digits, so
// reading back reproduces every double exactly.
void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);

// KNR: a "knr sigma F" line then the weight matrix block.
void write_knr(std::ostream& out, const KnrModel& model);
KnrModel read_knr(std::istream& in);

// Candidate list: a "candidates count" line then one matrix block per candidate.
void write_candidates(std::ostream& out, const LinearMdpModel::Candidates& candidates);
LinearMdpModel::Candidates read_candidates(std::istream& in);

// Feature maps: a kind line with scalar parameters, then matrix blocks for
// array parameters. Custom maps cannot be serialized.
void write_feature_map(std::ostream& out, const FeatureMap& phi);
FeatureMap read_feature_map(std::istream& in);

}  // namespace pcmlp
