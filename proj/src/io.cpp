#include "ama/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ama {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& j) {
  if (!j.is_array()) throw std::runtime_error("expected an array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
  return v;
}

json mat_to_json(const Mat& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat mat_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw std::runtime_error("expected a row-major nested array");
  Mat M(j.size(), j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != j[0].size()) throw std::runtime_error("ragged matrix rows");
    for (std::size_t k = 0; k < j[i].size(); ++k)
      M(static_cast<Index>(i), static_cast<Index>(k)) = j[i][k].get<double>();
  }
  return M;
}

namespace {

/// Bound arrays may hold null for an infinite entry.
Vec bound_from_json(const json& j, double inf_sign) {
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Index>(i)] = j[i].is_null() ? inf_sign * kInf : j[i].get<double>();
  }
  return v;
}

json bound_to_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      a.push_back(v[i]);
    } else {
      a.push_back(nullptr);
    }
  }
  return a;
}

std::shared_ptr<const ProxOracle> prox_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "box") {
    return std::make_shared<BoxIndicator>(bound_from_json(j.at("a"), -1.0),
                                          bound_from_json(j.at("b"), 1.0));
  }
  if (kind == "orthant") {
    return make_orthant_nonpositive(j.at("dim").get<Index>());
  }
  if (kind == "softbox") {
    return std::make_shared<SoftBox>(vec_from_json(j.at("a")), vec_from_json(j.at("b")),
                                     vec_from_json(j.at("alpha")));
  }
  if (kind == "ball") {
    return std::make_shared<BallIndicator>(j.at("dim").get<Index>(), j.at("r").get<double>());
  }
  if (kind == "scaleddist") {
    return std::make_shared<ScaledDistance>(vec_from_json(j.at("a")), vec_from_json(j.at("b")),
                                            j.at("alpha").get<double>());
  }
  throw std::runtime_error("unknown g kind: " + kind);
}

json prox_to_json(const ProxOracle& g);

json prox_leaf_to_json(const ProxOracle& g) {
  json j;
  if (const auto* box = dynamic_cast<const BoxIndicator*>(&g)) {
    j["kind"] = "box";
    j["a"] = bound_to_json(box->lower());
    j["b"] = bound_to_json(box->upper());
  } else if (const auto* sb = dynamic_cast<const SoftBox*>(&g)) {
    j["kind"] = "softbox";
    j["a"] = vec_to_json(sb->lower());
    j["b"] = vec_to_json(sb->upper());
    j["alpha"] = vec_to_json(sb->weights());
  } else if (const auto* ball = dynamic_cast<const BallIndicator*>(&g)) {
    j["kind"] = "ball";
    j["dim"] = ball->dim();
    j["r"] = ball->radius();
  } else if (const auto* sd = dynamic_cast<const ScaledDistance*>(&g)) {
    j["kind"] = "scaleddist";
    j["a"] = vec_to_json(sd->lower());
    j["b"] = vec_to_json(sd->upper());
    j["alpha"] = sd->weight();
  } else {
    throw std::logic_error("cannot serialize g kind: " + g.kind());
  }
  return j;
}

json prox_to_json(const ProxOracle& g) {
  if (const auto* bs = dynamic_cast<const BlockSum*>(&g)) {
    json blocks = json::array();
    for (const auto& blk : bs->blocks()) {
      json b = prox_leaf_to_json(*blk.g);
      b["offset"] = blk.offset;
      blocks.push_back(std::move(b));
    }
    return json{{"blocks", std::move(blocks)}};
  }
  return prox_leaf_to_json(g);
}

std::shared_ptr<const ProxOracle> g_from_json(const json& j) {
  if (j.contains("blocks")) {
    std::vector<BlockSum::Block> blocks;
    for (const auto& b : j.at("blocks")) {
      blocks.push_back({b.at("offset").get<Index>(), prox_from_json(b)});
    }
    return std::make_shared<BlockSum>(std::move(blocks));
  }
  return prox_from_json(j);
}

std::shared_ptr<const LinearMap> map_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "dense") {
    const Index rows = j.at("rows").get<Index>();
    const Index cols = j.at("cols").get<Index>();
    const json& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows * cols)
      throw std::runtime_error("A: data length does not match rows*cols");
    Mat M(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index k = 0; k < cols; ++k) M(i, k) = data[i * cols + k].get<double>();
    return std::make_shared<DenseMap>(std::move(M));
  }
  if (type == "blockdiag") {
    std::vector<Mat> blocks;
    for (const auto& b : j.at("blocks")) blocks.push_back(mat_from_json(b));
    return std::make_shared<BlockDiagMap>(std::move(blocks));
  }
  throw std::runtime_error("unknown A type: " + type);
}

json map_to_json(const LinearMap& A) {
  if (const auto* d = dynamic_cast<const DenseMap*>(&A)) {
    json data = json::array();
    const Mat& M = d->matrix();
    for (Index i = 0; i < M.rows(); ++i)
      for (Index k = 0; k < M.cols(); ++k) data.push_back(M(i, k));
    return json{{"type", "dense"}, {"rows", M.rows()}, {"cols", M.cols()},
                {"data", std::move(data)}};
  }
  if (const auto* b = dynamic_cast<const BlockDiagMap*>(&A)) {
    json blocks = json::array();
    for (const Mat& blk : b->blocks()) blocks.push_back(mat_to_json(blk));
    return json{{"type", "blockdiag"}, {"blocks", std::move(blocks)}};
  }
  throw std::logic_error("cannot serialize this LinearMap representation");
}

std::vector<Mat> mats_from_json(const json& j) {
  // Either one matrix [[..],[..]] or a per-stage list of matrices.
  if (j[0][0].is_array()) {
    std::vector<Mat> out;
    for (const auto& m : j) out.push_back(mat_from_json(m));
    return out;
  }
  return {mat_from_json(j)};
}

std::vector<Vec> vecs_from_json(const json& j) {
  if (j[0].is_array()) {
    std::vector<Vec> out;
    for (const auto& v : j) out.push_back(vec_from_json(v));
    return out;
  }
  return {vec_from_json(j)};
}

StageConstraint stage_con_from_json(const json& j) {
  return {mat_from_json(j.at("L")), prox_from_json(j.at("g"))};
}

}  // namespace

MpcSpec mpc_spec_from_json(const json& j) {
  MpcSpec spec;
  spec.N = j.at("N").get<int>();
  spec.nx = j.at("nx").get<Index>();
  spec.nu = j.at("nu").get<Index>();
  spec.Phi = mats_from_json(j.at("Phi"));
  spec.Gamma = mats_from_json(j.at("Gamma"));
  if (j.contains("c")) spec.c = vecs_from_json(j.at("c"));
  spec.x_init = vec_from_json(j.at("x_init"));
  spec.Q = mats_from_json(j.at("Q"));
  spec.R = mats_from_json(j.at("R"));
  spec.QN = mat_from_json(j.at("QN"));
  if (j.contains("x_ref")) spec.x_ref = vecs_from_json(j.at("x_ref"));
  if (j.contains("u_ref")) spec.u_ref = vecs_from_json(j.at("u_ref"));
  if (j.contains("stage_constraints")) {
    for (const auto& stage : j.at("stage_constraints")) {
      std::vector<StageConstraint> cons;
      for (const auto& c : stage) cons.push_back(stage_con_from_json(c));
      spec.stage_con.push_back(std::move(cons));
    }
  }
  if (j.contains("terminal_constraints")) {
    for (const auto& c : j.at("terminal_constraints"))
      spec.terminal_con.push_back(stage_con_from_json(c));
  }
  spec.validate();
  return spec;
}

ProblemFile problem_from_json(const json& j) {
  ProblemFile pf;
  if (j.contains("mpc")) {
    pf.mpc = mpc_spec_from_json(j.at("mpc"));
    pf.problem = build_problem(*pf.mpc).problem;
  } else {
    const json& f = j.at("f");
    const std::string type = f.at("type").get<std::string>();
    if (type == "quadratic") {
      pf.problem.f =
          std::make_shared<QuadraticOracle>(mat_from_json(f.at("H")), vec_from_json(f.at("q")));
    } else if (type == "mpc") {
      pf.mpc = mpc_spec_from_json(f.at("spec"));
      pf.problem.f = std::make_shared<RiccatiOracle>(*pf.mpc);
    } else {
      throw std::runtime_error("unknown f type: " + type);
    }
    pf.problem.g = g_from_json(j.at("g"));
    pf.problem.A = map_from_json(j.at("A"));
  }
  pf.problem.validate();
  if (j.contains("y0")) {
    pf.y0 = vec_from_json(j.at("y0"));
    if (pf.y0->size() != pf.problem.dual_dim())
      throw std::runtime_error("y0 does not match the dual dimension");
  }
  return pf;
}

json problem_to_json(const Problem& problem, const Vec* y0) {
  const auto* quad = dynamic_cast<const QuadraticOracle*>(problem.f.get());
  if (!quad) throw std::logic_error("problem_to_json: only quadratic f is serializable");
  json j;
  j["f"] = {{"type", "quadratic"}, {"H", mat_to_json(quad->hessian())},
            {"q", vec_to_json(quad->linear())}};
  j["g"] = prox_to_json(*problem.g);
  j["A"] = map_to_json(*problem.A);
  if (y0) j["y0"] = vec_to_json(*y0);
  return j;
}

ProblemFile load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& err) {
    throw std::runtime_error("malformed JSON in " + path + ": " + err.what());
  }
  return problem_from_json(j);
}

void save_problem_file(const std::string& path, const Problem& problem, const Vec* y0) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write problem file: " + path);
  out << problem_to_json(problem, y0).dump(2) << "\n";
}

void write_trace_csv(const std::string& path, const SolveTrace& trace, bool zero_time) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "k,gamma,tau,backtracks,res_inf,ame,x_updates,z_updates,time_ms\n";
  for (const IterRecord& r : trace.rows) {
    out << r.k << ',' << format_double(r.gamma) << ',' << format_double(r.tau) << ','
        << r.backtracks << ',' << format_double(r.res_inf) << ',' << format_double(r.ame) << ','
        << r.x_updates << ',' << r.z_updates << ',' << format_double(zero_time ? 0.0 : r.time_ms)
        << '\n';
  }
}

TraceData read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace file: " + path);
  TraceData data;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    IterRecord r;
    auto next = [&]() {
      if (!std::getline(ss, field, ',')) throw std::runtime_error("short trace row");
      return field;
    };
    r.k = std::stoi(next());
    r.gamma = std::stod(next());
    r.tau = std::stod(next());
    r.backtracks = std::stoi(next());
    r.res_inf = std::stod(next());
    r.ame = std::stod(next());
    r.x_updates = std::stol(next());
    r.z_updates = std::stol(next());
    r.time_ms = std::stod(next());
    data.rows.push_back(r);
  }
  return data;
}

}  // namespace ama
