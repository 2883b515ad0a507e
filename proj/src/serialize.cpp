#include "covchan/serialize.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace covchan {

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
  return (path.empty() ? std::string("") : path) + "[" + std::to_string(i) + "]";
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ParseError((path.empty() ? std::string("<root>") : path) + ": " + msg);
}

const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(join(path, key), "missing field");
  return *it;
}

std::size_t positive_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() <= 0) fail(path, "expected a positive integer");
  return j.get<std::size_t>();
}

double real(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(path, "non-finite value");
  return x;
}

Complex complex_entry(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [re, im] pair");
  return {real(j[0], index(path, 0)), real(j[1], index(path, 1))};
}

/// Runs a constructor that validates domain invariants, relabelling its
/// errors with the JSON path.
template <typename F>
auto at_path(const std::string& path, F&& make) -> decltype(make()) {
  try {
    return make();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
}

Target parse_target(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected \"A\", \"B\" or \"joint\"");
  const auto s = j.get<std::string>();
  if (s == "A") return Target::kSubsystemA;
  if (s == "B") return Target::kSubsystemB;
  if (s == "joint") return Target::kJoint;
  fail(path, "unknown target '" + s + "'");
}

FrameChoice parse_frame_choice(const Json& j, const std::string& path) {
  const Json& kind = require(j, "kind", path);
  if (!kind.is_string()) fail(join(path, "kind"), "expected a string");
  const auto k = kind.get<std::string>();
  if (k == "covariant") return CovariantChoice{};
  if (k == "mixing") {
    const std::string p = join(path, "unitary");
    CMatrix v = matrix_from_json(require(j, "unitary", path), p);
    return at_path(p, [&] { return MixingUnitary(std::move(v)); });
  }
  if (k == "explicit") return kraus_from_json(require(j, "kraus", path), join(path, "kraus"));
  fail(join(path, "kind"), "unknown frame choice '" + k + "'");
}

}  // namespace

Json matrix_to_json(const CMatrix& m) {
  Json data = Json::array();
  for (const auto& z : m.entries()) data.push_back(Json::array({z.real(), z.imag()}));
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

CMatrix matrix_from_json(const Json& j, const std::string& path) {
  const std::size_t rows = positive_int(require(j, "rows", path), join(path, "rows"));
  const std::size_t cols = positive_int(require(j, "cols", path), join(path, "cols"));
  const Json& data = require(j, "data", path);
  const std::string data_path = join(path, "data");
  if (!data.is_array()) fail(data_path, "expected an array");
  if (data.size() != rows * cols)
    fail(data_path, "expected " + std::to_string(rows * cols) + " entries, got " + std::to_string(data.size()));
  std::vector<Complex> entries;
  entries.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) entries.push_back(complex_entry(data[i], index(data_path, i)));
  return CMatrix(rows, cols, std::move(entries));
}

Json kraus_to_json(const KrausSet& k) {
  Json ops = Json::array();
  for (const auto& op : k.ops()) ops.push_back(matrix_to_json(op));
  return Json{{"dim", k.dim()}, {"ops", std::move(ops)}};
}

KrausSet kraus_from_json(const Json& j, const std::string& path) {
  const std::size_t dim = positive_int(require(j, "dim", path), join(path, "dim"));
  const Json& ops = require(j, "ops", path);
  const std::string ops_path = join(path, "ops");
  if (!ops.is_array() || ops.empty()) fail(ops_path, "expected a non-empty array");
  std::vector<CMatrix> mats;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    CMatrix m = matrix_from_json(ops[i], index(ops_path, i));
    if (m.rows() != dim || m.cols() != dim)
      fail(index(ops_path, i), "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " operator");
    mats.push_back(std::move(m));
  }
  return KrausSet(std::move(mats));
}

ScenarioConfig scenario_from_json(const Json& j, double default_tol) {
  if (!j.is_object()) fail("", "expected an object");
  const std::size_t dim_a = positive_int(require(j, "dim_a", ""), "dim_a");
  const std::size_t dim_b = positive_int(require(j, "dim_b", ""), "dim_b");
  const std::size_t d = dim_a * dim_b;

  const Json& init = require(j, "initial_state", "");
  DensityMatrix initial = [&] {
    if (init.is_object() && init.contains("pure")) {
      const Json& amps = init["pure"];
      if (!amps.is_array() || amps.size() != d)
        fail("initial_state.pure", "expected " + std::to_string(d) + " amplitudes");
      std::vector<Complex> psi;
      for (std::size_t i = 0; i < amps.size(); ++i)
        psi.push_back(complex_entry(amps[i], index("initial_state.pure", i)));
      return at_path("initial_state.pure", [&] { return DensityMatrix::pure(psi); });
    }
    CMatrix m = matrix_from_json(init, "initial_state");
    return at_path("initial_state", [&] { return DensityMatrix(std::move(m)); });
  }();

  FrameTransform frame = [&] {
    if (!j.contains("frame")) return FrameTransform::identity(d);
    const Json& fj = j["frame"];
    if (fj.is_object() && fj.contains("product")) {
      const Json& parts = fj["product"];
      if (!parts.is_array() || parts.size() != 2) fail("frame.product", "expected two matrices");
      CMatrix a = matrix_from_json(parts[0], "frame.product[0]");
      CMatrix b = matrix_from_json(parts[1], "frame.product[1]");
      return at_path("frame.product", [&] { return FrameTransform(kron(a, b)); });
    }
    CMatrix m = matrix_from_json(fj, "frame");
    return at_path("frame", [&] { return FrameTransform(std::move(m)); });
  }();

  double tol = default_tol;
  if (j.contains("tol")) tol = real(j["tol"], "tol");

  std::vector<Intervention> interventions;
  if (j.contains("interventions")) {
    const Json& list = j["interventions"];
    if (!list.is_array()) fail("interventions", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string p = index("interventions", i);
      const Json& item = list[i];
      if (!item.is_object()) fail(p, "expected an object");
      std::string label = "#" + std::to_string(i);
      if (item.contains("label")) {
        if (!item["label"].is_string()) fail(join(p, "label"), "expected a string");
        label = item["label"].get<std::string>();
      }
      Target target = item.contains("target") ? parse_target(item["target"], join(p, "target")) : Target::kJoint;
      KrausSet kraus = kraus_from_json(require(item, "kraus", p), join(p, "kraus"));
      std::vector<std::vector<std::size_t>> branches;
      if (item.contains("branches")) {
        const Json& bj = item["branches"];
        const std::string bp = join(p, "branches");
        if (!bj.is_array()) fail(bp, "expected an array of index arrays");
        for (std::size_t b = 0; b < bj.size(); ++b) {
          if (!bj[b].is_array()) fail(index(bp, b), "expected an array of indices");
          std::vector<std::size_t> group;
          for (std::size_t e = 0; e < bj[b].size(); ++e) {
            const Json& v = bj[b][e];
            if (!v.is_number_integer() || v.get<long long>() < 0)
              fail(index(index(bp, b), e), "expected a non-negative integer");
            group.push_back(v.get<std::size_t>());
          }
          branches.push_back(std::move(group));
        }
      }
      FrameChoice choice = CovariantChoice{};
      if (item.contains("frame_choice")) choice = parse_frame_choice(item["frame_choice"], join(p, "frame_choice"));
      interventions.push_back({std::move(label), std::move(kraus), target, std::move(branches), std::move(choice)});
    }
  }
  return ScenarioConfig{dim_a, dim_b, std::move(initial), std::move(interventions), std::move(frame), tol};
}

Json real_to_json(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json to_json(const CovarianceReport& r) {
  return Json{{"residual", real_to_json(r.residual)},
              {"covariant_distance", real_to_json(r.covariant_distance)},
              {"phase_aligned", r.phase_aligned},
              {"rank", r.rank},
              {"dim", r.dim},
              {"verdict", std::string(to_string(r.verdict))}};
}

Json to_json(const N1Check& c) {
  Json j{{"verdict", std::string(to_string(c.verdict))},
         {"phase", Json::array({c.alignment.phase.real(), c.alignment.phase.imag()})},
         {"phase_distance", real_to_json(c.alignment.distance)}};
  if (c.witness) {
    j["witness"] = matrix_to_json(c.witness->mat());
    j["witness_distance"] = real_to_json(c.witness_distance);
  }
  return j;
}

Json to_json(const N1SearchReport& r) {
  return Json{{"sampled", r.sampled},
              {"restarts", r.restarts},
              {"evaluations", r.evaluations},
              {"compatible", r.compatible},
              {"cross_check_failures", r.cross_check_failures},
              {"violations", r.violations},
              {"min_residual", real_to_json(r.min_residual)},
              {"min_noncovariant_residual", real_to_json(r.min_noncovariant_residual)},
              {"best_minimized_residual", real_to_json(r.best_minimized_residual)}};
}

Json to_json(const ScenarioResult& r) {
  Json interventions = Json::array();
  for (const auto& rec : r.interventions) {
    Json branches = Json::array();
    for (const auto& br : rec.branches) {
      branches.push_back(Json{{"prob_s", real_to_json(br.prob_s)},
                              {"prob_sprime", real_to_json(br.prob_sprime)},
                              {"state_s", br.state_s ? matrix_to_json(br.state_s->mat()) : Json(nullptr)},
                              {"state_sprime", br.state_sprime ? matrix_to_json(br.state_sprime->mat()) : Json(nullptr)}});
    }
    interventions.push_back(Json{{"label", rec.label}, {"branches", std::move(branches)}, {"report", to_json(rec.report)}});
  }
  Json joint = Json::array();
  for (const auto& o : r.joint)
    joint.push_back(Json{{"outcome", o.outcome}, {"prob_s", real_to_json(o.prob_s)}, {"prob_sprime", real_to_json(o.prob_sprime)}});
  return Json{{"interventions", std::move(interventions)},
              {"joint", std::move(joint)},
              {"final_s", matrix_to_json(r.final_s.mat())},
              {"final_sprime", matrix_to_json(r.final_sprime.mat())},
              {"probability_defect", real_to_json(r.probability_defect)},
              {"state_defect", real_to_json(r.state_defect)},
              {"covariance_defect", real_to_json(r.covariance_defect)},
              {"covariant", r.covariant}};
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(tmp.string() + ": cannot open for writing");
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error(tmp.string() + ": write failed");
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace covchan
