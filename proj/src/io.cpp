#include "hetquad/io.hpp"

#include <cmath>
#include <fstream>

namespace hetquad::io {

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

Matrix matrix_from_json(const Json& j, int rows, int cols) {
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    Json flat = Json::array();
    for (const auto& row : j) {
      if (!row.is_array() || static_cast<int>(row.size()) != cols)
        throw FormatError("expected " + std::to_string(cols) + " entries per row");
      for (const auto& v : row) flat.push_back(v);
    }
    if (static_cast<int>(j.size()) != rows) throw FormatError("expected " + std::to_string(rows) + " rows");
    return matrix_from_json(flat, rows, cols);
  }
  if (!j.is_array() || static_cast<int>(j.size()) != rows * cols)
    throw FormatError("expected " + std::to_string(rows * cols) + " matrix entries");
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const Json& v = j[r * cols + c];
      if (!v.is_number()) throw FormatError("matrix entry is not a number");
      m(r, c) = v.get<double>();
    }
  return m;
}

namespace {

Json vector_to_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("expected an array");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

template <class T>
T require(const Json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad field '") + key + "': " + e.what());
  }
}

Json blocks_to_json(const std::vector<SymMat>& b) {
  Json out = Json::array();
  for (const auto& m : b) out.push_back(matrix_to_json(m.mat()));
  return out;
}

std::vector<SymMat> blocks_from_json(const Json& j, int d) {
  std::vector<SymMat> out;
  for (const auto& e : j) out.emplace_back(matrix_from_json(e, d, d));
  return out;
}

SolveStatus status_from_string(const std::string& s) {
  if (s == "Optimal") return SolveStatus::Optimal;
  if (s == "Infeasible") return SolveStatus::Infeasible;
  if (s == "NumericalFailure") return SolveStatus::NumericalFailure;
  throw FormatError("unknown status '" + s + "'");
}

}  // namespace

Json instance_to_json(const ProblemInstance& c, const Json& meta) {
  Json j;
  j["d"] = c.d();
  j["k"] = c.k();
  j["mats"] = Json::array();
  for (const auto& m : c.mats()) j["mats"].push_back(matrix_to_json(m.mat()));
  j["meta"] = meta;
  if (c.psd_shift() != 0.0) j["meta"]["psd_shift"] = c.psd_shift();
  if (c.scale() != 1.0) j["meta"]["scale"] = c.scale();
  return j;
}

ProblemInstance instance_from_json(const Json& j) {
  const int d = require<int>(j, "d");
  const int k = require<int>(j, "k");
  if (d < 1 || k < 1 || k > d) throw FormatError("instance: need 1 <= k <= d");
  const Json& mats = j.at("mats");
  if (!mats.is_array() || static_cast<int>(mats.size()) != k) throw FormatError("instance: need k matrices");
  std::vector<SymMat> out;
  for (int i = 0; i < k; ++i) {
    const Matrix m = matrix_from_json(mats[i], d, d);
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) throw FormatError("instance: matrix " + std::to_string(i) + " is not symmetric");
    out.emplace_back(m);
  }
  double shift = 0.0, scale = 1.0;
  if (j.contains("meta") && j["meta"].is_object()) {
    shift = j["meta"].value("psd_shift", 0.0);
    scale = j["meta"].value("scale", 1.0);
  }
  return ProblemInstance(std::move(out), shift, scale);
}

Json model_to_json(const HppcaModel& m) {
  Json j;
  j["d"] = m.d;
  j["k"] = m.k;
  j["lambdas"] = vector_to_json(m.lambdas);
  j["variances"] = vector_to_json(m.variances);
  j["group_sizes"] = m.group_sizes;
  j["seed"] = m.seed;
  j["u_true"] = matrix_to_json(m.u_true);
  return j;
}

HppcaModel model_from_json(const Json& j) {
  const int d = require<int>(j, "d");
  const int k = require<int>(j, "k");
  std::optional<Matrix> u;
  if (j.contains("u_true")) u = matrix_from_json(j["u_true"], d, k);
  try {
    return make_hppca_model(d, k, vector_from_json(j.at("lambdas")), vector_from_json(j.at("variances")),
                            require<std::vector<int>>(j, "group_sizes"), require<std::uint64_t>(j, "seed"), u);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
}

Json point_to_json(const StiefelPoint& u) {
  return Json{{"d", u.d()}, {"k", u.k()}, {"u", matrix_to_json(u.mat())}};
}

StiefelPoint point_from_json(const Json& j) {
  const int d = require<int>(j, "d");
  const int k = require<int>(j, "k");
  return StiefelPoint(matrix_from_json(j.at("u"), d, k), 1e-8);
}

Json report_to_json(const SolveReport& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["message"] = r.message;
  j["p_star"] = r.primal.objective;
  j["d_star"] = r.dual.objective;
  j["value"] = r.value();
  j["gap"] = r.gap;
  j["kkt_residuals"] = r.kkt;
  j["iterations"] = r.iterations;
  j["wall_time"] = r.wall_time;
  j["psd_shift"] = r.psd_shift;
  j["scale"] = r.scale;
  j["x_blocks"] = blocks_to_json(r.primal.x_blocks);
  if (r.dual.y.dim() > 0) {
    j["y"] = matrix_to_json(r.dual.y.mat());
    j["z_blocks"] = blocks_to_json(r.dual.z_blocks);
    j["nu"] = vector_to_json(r.dual.nu);
  }
  if (!r.primal.x_blocks.empty()) {
    j["rop_error"] = rop_error(r.primal.x_blocks);
    const Candidate cand = extract_candidate(r.primal);
    j["candidate"] = point_to_json(cand.u);
    j["tie_flags"] = cand.tie_flags;
  }
  return j;
}

SolveReport report_from_json(const Json& j) {
  SolveReport r;
  r.status = status_from_string(require<std::string>(j, "status"));
  r.primal.objective = require<double>(j, "p_star");
  r.dual.objective = j.value("d_star", 0.0);
  r.gap = j.value("gap", 0.0);
  r.iterations = j.value("iterations", 0);
  r.wall_time = j.value("wall_time", 0.0);
  const Json& xb = j.at("x_blocks");
  if (!xb.empty()) {
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(xb[0].size()))));
    r.primal.x_blocks = blocks_from_json(xb, d);
    if (j.contains("y")) {
      r.dual.y = SymMat(matrix_from_json(j["y"], d, d));
      r.dual.z_blocks = blocks_from_json(j["z_blocks"], d);
      r.dual.nu = vector_from_json(j["nu"]);
    }
  }
  if (j.contains("kkt_residuals")) r.kkt = j["kkt_residuals"].get<KktResiduals>();
  return r;
}

Json certificate_to_json(const CertificateResult& r) {
  Json j;
  j["status"] = to_string(r.status);
  j["classification"] = to_string(r.classification);
  j["nu_witness"] = vector_to_json(r.nu_witness);
  j["min_eig_slacks"] = r.min_eig_slacks;
  j["precondition_weak"] = r.precondition_weak;
  j["grad_norm"] = r.grad_norm;
  j["symmetry_residual"] = r.symmetry_residual;
  j["t"] = std::isfinite(r.t) ? Json(r.t) : Json(nullptr);
  j["kkt_residuals"] = r.kkt;
  j["message"] = r.message;
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace hetquad::io
