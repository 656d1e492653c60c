#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "steering/assemblage.hpp"
#include "steering/lhs.hpp"
#include "steering/snio.hpp"

namespace steering {

using json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

// --- primitives ------------------------------------------------------------

inline json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json matrix_to_json(const HermitianMatrix& m) {
  return matrix_to_json(m.matrix());
}

inline CMatrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw ValidationError("matrix JSON must be a non-empty array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  CMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = j.at(i);
    if (!row.is_array() || row.size() != cols)
      throw ValidationError("ragged matrix rows in JSON");
    for (std::size_t jj = 0; jj < cols; ++jj) {
      const json& cell = row.at(jj);
      if (!cell.is_array() || cell.size() != 2)
        throw ValidationError("matrix entries must be [re, im] pairs");
      m(i, jj) = cplx(cell.at(0).get<double>(), cell.at(1).get<double>());
    }
  }
  return m;
}

inline void check_format(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("format") ||
      j.at("format").get<int>() != kFormatVersion)
    throw ValidationError(std::string(what) +
                          ": missing or unsupported \"format\" field");
}

// --- assemblage ------------------------------------------------------------

inline json to_json(const Assemblage& ass) {
  json j;
  j["format"] = kFormatVersion;
  j["r"] = ass.outputs();
  j["s"] = ass.inputs();
  j["d"] = ass.dim();
  json members = json::array();
  for (std::size_t x = 0; x < ass.inputs(); ++x)
    for (std::size_t a = 0; a < ass.outputs(); ++a) {
      json e;
      e["a"] = a;
      e["x"] = x;
      e["matrix"] = matrix_to_json(ass.member(a, x));
      members.push_back(std::move(e));
    }
  j["members"] = std::move(members);
  return j;
}

inline Assemblage assemblage_from_json(const json& j) {
  check_format(j, "assemblage");
  const auto r = j.at("r").get<std::size_t>();
  const auto s = j.at("s").get<std::size_t>();
  const auto d = j.at("d").get<std::size_t>();
  const json& members = j.at("members");
  if (!members.is_array() || members.size() != r * s)
    throw ValidationError("assemblage JSON needs exactly r*s members");
  std::vector<HermitianMatrix> mats(r * s, HermitianMatrix::zero(d));
  std::vector<bool> seen(r * s, false);
  for (const json& e : members) {
    const auto a = e.at("a").get<std::size_t>();
    const auto x = e.at("x").get<std::size_t>();
    if (a >= r || x >= s) throw ValidationError("member index out of range");
    if (seen[x * r + a]) throw ValidationError("duplicate member (a, x)");
    seen[x * r + a] = true;
    CMatrix m = matrix_from_json(e.at("matrix"));
    if (m.rows() != d || m.cols() != d)
      throw ValidationError("member matrix has the wrong dimension");
    if (m.hermiticity_defect() > 1e-9)
      throw ValidationError("member matrix is not Hermitian");
    mats[x * r + a] = HermitianMatrix::symmetrized(m);
  }
  return Assemblage::build(r, s, d, std::move(mats));
}

// --- hidden-state model ------------------------------------------------------

inline json to_json(const LhsModel& model) {
  json j;
  j["format"] = kFormatVersion;
  j["r"] = model.r;
  j["s"] = model.s;
  j["d"] = model.d;
  json lambdas = json::array();
  for (std::size_t l = 0; l < model.prior.size(); ++l) {
    json e;
    e["lambda"] = l;
    e["weight"] = model.prior[l];
    json resp = json::array();
    for (std::size_t x = 0; x < model.s; ++x) {
      json row = json::array();
      for (std::size_t a = 0; a < model.r; ++a)
        row.push_back(model.response[l](x, a));
      resp.push_back(std::move(row));
    }
    e["response"] = std::move(resp);
    e["state"] = matrix_to_json(model.states[l]);
    lambdas.push_back(std::move(e));
  }
  j["lambdas"] = std::move(lambdas);
  return j;
}

inline LhsModel lhs_model_from_json(const json& j) {
  check_format(j, "hidden-state model");
  LhsModel model;
  model.r = j.at("r").get<std::size_t>();
  model.s = j.at("s").get<std::size_t>();
  model.d = j.at("d").get<std::size_t>();
  for (const json& e : j.at("lambdas")) {
    model.prior.push_back(e.at("weight").get<double>());
    const json& resp = e.at("response");
    std::vector<double> flat;
    if (resp.size() != model.s)
      throw ValidationError("response table needs one row per input");
    for (const json& row : resp) {
      if (row.size() != model.r)
        throw ValidationError("response row needs one entry per outcome");
      for (const json& v : row) flat.push_back(v.get<double>());
    }
    model.response.push_back(
        ProbTable::validated({model.s, model.r}, std::move(flat), 1, 1e-9));
    CMatrix st = matrix_from_json(e.at("state"));
    if (st.rows() != model.d || st.cols() != model.d)
      throw ValidationError("hidden state has the wrong dimension");
    model.states.push_back(HermitianMatrix::symmetrized(st));
  }
  model.validate();
  return model;
}

// --- operation ---------------------------------------------------------------

inline json to_json(const SnioMap& snio) {
  json j;
  j["format"] = kFormatVersion;
  json kraus = json::array();
  for (std::size_t w = 0; w < snio.kraus.branches(); ++w) {
    json e;
    e["omega"] = w;
    e["matrix"] = matrix_to_json(snio.kraus.ops[w]);
    kraus.push_back(std::move(e));
  }
  j["kraus"] = std::move(kraus);
  json wiring;
  wiring["sf"] = snio.wiring.sf;
  wiring["rf"] = snio.wiring.rf;
  const Wiring& w = snio.wiring;
  json px = json::array();
  for (std::size_t o = 0; o < w.branches(); ++o) {
    json per_xf = json::array();
    for (std::size_t xf = 0; xf < w.sf; ++xf) {
      json row = json::array();
      for (std::size_t x = 0; x < w.s; ++x) row.push_back(w.p_x(o, xf, x));
      per_xf.push_back(std::move(row));
    }
    px.push_back(std::move(per_xf));
  }
  wiring["p_x"] = std::move(px);
  json paf = json::array();
  for (std::size_t o = 0; o < w.branches(); ++o) {
    json l1 = json::array();
    for (std::size_t xf = 0; xf < w.sf; ++xf) {
      json l2 = json::array();
      for (std::size_t x = 0; x < w.s; ++x) {
        json l3 = json::array();
        for (std::size_t a = 0; a < w.r; ++a) {
          json row = json::array();
          for (std::size_t af = 0; af < w.rf; ++af)
            row.push_back(w.p_af(o, xf, x, a, af));
          l3.push_back(std::move(row));
        }
        l2.push_back(std::move(l3));
      }
      l1.push_back(std::move(l2));
    }
    paf.push_back(std::move(l1));
  }
  wiring["p_af"] = std::move(paf);
  j["wiring"] = std::move(wiring);
  return j;
}

inline SnioMap snio_from_json(const json& j) {
  check_format(j, "operation");
  SnioMap snio;
  const json& kraus = j.at("kraus");
  if (!kraus.is_array() || kraus.empty())
    throw ValidationError("operation needs at least one Kraus branch");
  snio.kraus.ops.resize(kraus.size(), CMatrix(1, 1));
  std::vector<bool> seen(kraus.size(), false);
  for (const json& e : kraus) {
    const auto w = e.at("omega").get<std::size_t>();
    if (w >= kraus.size() || seen[w])
      throw ValidationError("bad or duplicate branch index");
    seen[w] = true;
    snio.kraus.ops[w] = matrix_from_json(e.at("matrix"));
  }

  const json& wiring = j.at("wiring");
  Wiring& w = snio.wiring;
  w.sf = wiring.at("sf").get<std::size_t>();
  w.rf = wiring.at("rf").get<std::size_t>();
  const json& px = wiring.at("p_x");
  const json& paf = wiring.at("p_af");
  if (px.size() != kraus.size() || paf.size() != kraus.size())
    throw ValidationError("wiring tables must cover every branch");
  if (px.front().size() != w.sf || px.front().front().empty())
    throw ValidationError("p_x shape mismatch");
  w.s = px.front().front().size();
  w.r = paf.front().front().front().size();

  std::vector<double> flat_px, flat_paf;
  for (const json& per_xf : px) {
    if (per_xf.size() != w.sf) throw ValidationError("p_x shape mismatch");
    for (const json& row : per_xf) {
      if (row.size() != w.s) throw ValidationError("p_x shape mismatch");
      for (const json& v : row) flat_px.push_back(v.get<double>());
    }
  }
  for (const json& l1 : paf) {
    if (l1.size() != w.sf) throw ValidationError("p_af shape mismatch");
    for (const json& l2 : l1) {
      if (l2.size() != w.s) throw ValidationError("p_af shape mismatch");
      for (const json& l3 : l2) {
        if (l3.size() != w.r) throw ValidationError("p_af shape mismatch");
        for (const json& row : l3) {
          if (row.size() != w.rf) throw ValidationError("p_af shape mismatch");
          for (const json& v : row) flat_paf.push_back(v.get<double>());
        }
      }
    }
  }
  w.p_x = ProbTable::validated({kraus.size(), w.sf, w.s}, std::move(flat_px),
                               2, 1e-9);
  w.p_af = ProbTable::validated({kraus.size(), w.sf, w.s, w.r, w.rf},
                                std::move(flat_paf), 4, 1e-9);
  return snio;
}

// --- files -------------------------------------------------------------------

inline std::string canonical_dump(const json& j) { return j.dump(1) + "\n"; }

inline void save_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  out << canonical_dump(j);
  if (!out) throw Error("write failed: " + path);
}

inline json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path);
  try {
    return json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid JSON in " + path + ": " + e.what());
  }
}

inline Assemblage read_assemblage(const std::string& path) {
  try {
    return assemblage_from_json(load_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad assemblage file " + path + ": " + e.what());
  }
}

inline SnioMap read_snio(const std::string& path) {
  try {
    return snio_from_json(load_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad operation file " + path + ": " + e.what());
  }
}

inline LhsModel read_lhs_model(const std::string& path) {
  try {
    return lhs_model_from_json(load_json(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad model file " + path + ": " + e.what());
  }
}

}  // namespace steering
