#pragma once

#include <string>

#include <json.hpp>

#include "hetquad/certificate.hpp"
#include "hetquad/hppca.hpp"
#include "hetquad/sdp.hpp"
#include "hetquad/stiefel.hpp"

namespace hetquad::io {

using Json = nlohmann::json;

/// Row-major flat list of a matrix's entries.
Json matrix_to_json(const Matrix& m);
/// Reads rows x cols row-major entries, given flat or as a list of rows;
/// throws FormatError on size mismatch.
Matrix matrix_from_json(const Json& j, int rows, int cols);

/// {"d","k","mats":[[...]...],"meta":{...}}. Asymmetry above 1e-12 is a
/// FormatError on load.
Json instance_to_json(const ProblemInstance& c, const Json& meta = Json::object());
ProblemInstance instance_from_json(const Json& j);

/// {"d","k","lambdas","variances","group_sizes","seed", optional "u_true"}.
Json model_to_json(const HppcaModel& m);
HppcaModel model_from_json(const Json& j);

/// {"d","k","u":[row-major]}
Json point_to_json(const StiefelPoint& u);
StiefelPoint point_from_json(const Json& j);

Json report_to_json(const SolveReport& r);
/// Restores the fields needed downstream (status, blocks, duals, values).
SolveReport report_from_json(const Json& j);

Json certificate_to_json(const CertificateResult& r);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace hetquad::io
