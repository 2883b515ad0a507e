#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "covchan/scenario.hpp"

namespace covchan {

/// Malformed input file. The message starts with the JSON path of the
/// offending field, e.g. "ops[1].data[3]: expected [re, im] pair".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

// MatrixFile: {"rows": r, "cols": c, "data": [[re, im], ...]} row-major.
Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, const std::string& path = "");

// Kraus file: {"dim": d, "ops": [MatrixFile, ...]}.
Json kraus_to_json(const KrausSet& k);
KrausSet kraus_from_json(const Json& j, const std::string& path = "");

/// Scenario config. Schema:
///   dim_a, dim_b       positive integers
///   initial_state      MatrixFile, or {"pure": [[re, im], ...]}
///   frame              MatrixFile, {"product": [MatrixFile, MatrixFile]},
///                      or absent for the identity
///   tol                optional real
///   interventions      [{label, target: "A"|"B"|"joint", kraus,
///                        branches?: [[int, ...], ...],
///                        frame_choice?: {"kind": "covariant"}
///                                     | {"kind": "mixing", "unitary": MatrixFile}
///                                     | {"kind": "explicit", "kraus": Kraus file}}]
ScenarioConfig scenario_from_json(const Json& j, double default_tol);

/// Infinite and NaN values serialize as null.
Json real_to_json(double x);

Json to_json(const CovarianceReport& r);
Json to_json(const N1Check& c);
Json to_json(const N1SearchReport& r);
Json to_json(const ScenarioResult& r);

Json load_json_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place, so a
/// failed run never leaves a partial file at `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace covchan
